"""Pattern extraction, data reduction and the alternating window/lattice loop."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .dsp import ChirpedGaussianParams, as_signal, dft, gaussian_window, tf_center
from .errors import BandLimitError, InvalidParameterError
from .gabor import GaborCoefficients, Lattice, dgt, dual_window, idgt, lattice_points
from .lattice_adapt import adapted_lattice_real, fit_chirped_gaussian, rationalize_lattice
from .optimizers import (
    OptimConfig,
    lp_concentration,
    optimize_nonparametric,
    optimize_parametric,
)


@dataclass(frozen=True)
class TFRegion:
    """Closed box of sample indices and frequency bins.

    ``f_min > f_max`` denotes a band that wraps through bin 0.
    """

    t_min: int
    t_max: int
    f_min: int
    f_max: int

    def validate(self, N):
        if not 0 <= self.t_min <= self.t_max < N:
            raise InvalidParameterError(f"time range [{self.t_min}, {self.t_max}] invalid for N={N}")
        if not (0 <= self.f_min < N and 0 <= self.f_max < N):
            raise InvalidParameterError(f"frequency range [{self.f_min}, {self.f_max}] invalid for N={N}")

    def contains(self, x, xi):
        x = np.asarray(x)
        xi = np.asarray(xi)
        in_t = (x >= self.t_min) & (x <= self.t_max)
        if self.f_min <= self.f_max:
            in_f = (xi >= self.f_min) & (xi <= self.f_max)
        else:
            in_f = (xi >= self.f_min) | (xi <= self.f_max)
        return in_t & in_f

    def mask(self, lattice):
        pts = lattice_points(lattice)
        inside = self.contains(pts[:, 0], pts[:, 1])
        return inside.reshape(lattice.shape, order="F").astype(float)

    @classmethod
    def whole(cls, N):
        return cls(0, N - 1, 0, N - 1)


def extract_pattern(f, g0, lattice, region, center=True):
    """Keep the coefficients inside ``region`` and resynthesise.

    The canonical dual of ``g0`` is used for synthesis. The result is
    TF-centred unless ``center`` is false; an empty selection yields zeros.
    """
    f = as_signal(f)
    region.validate(f.size)
    c = dgt(f, g0, lattice)
    mask = region.mask(lattice)
    if not mask.any():
        return np.zeros(f.size, dtype=np.complex128)
    h = idgt(c.values * mask, dual_window(g0, lattice), lattice)
    if center:
        h = tf_center(h)
    return h


def band_energy_outside(h, factor):
    """Fraction of the DFT energy of ``h`` outside the central ``N/factor`` bins."""
    N = h.size
    keep = N // factor
    k = np.fft.fftfreq(N, 1.0 / N)
    inside = (k >= -keep / 2) & (k < keep / 2)
    e = np.abs(dft(h)) ** 2
    total = e.sum()
    return float(e[~inside].sum() / total) if total > 0 else 0.0


def reduce(h, factor, max_outside=0.01):
    """Shorten ``h`` by ``factor`` by keeping its central ``N/factor`` bins.

    With unitary DFTs on both sides the l2 norm of a band-limited signal is
    preserved exactly.
    """
    h = as_signal(h)
    N = h.size
    if factor < 1 or N % factor:
        raise InvalidParameterError(f"factor {factor} does not divide N={N}")
    if factor == 1:
        return h
    outside = band_energy_outside(h, factor)
    if outside > max_outside:
        raise BandLimitError(
            f"{100 * outside:.2f}% of the energy lies outside the kept band "
            f"(limit {100 * max_outside:.2f}%)",
            outside,
        )
    M = N // factor
    spectrum = dft(h)
    k = np.arange(-(M // 2), M - M // 2)
    small = np.zeros(M, dtype=np.complex128)
    small[k % M] = spectrum[k % N]
    return dft(small, inverse=True)


@dataclass
class AlternateConfig:
    initial_lattice: Lattice
    redundancy: float
    max_rounds: int = 10
    lattice_fixpoint: bool = True
    optim: OptimConfig = field(default_factory=OptimConfig)
    method: str = "param"
    start: ChirpedGaussianParams = ChirpedGaussianParams(1.0, 0.0)
    sigma_grid: tuple = tuple(np.geomspace(0.125, 16, 29))
    s_grid: tuple = tuple(np.linspace(-0.02, 0.02, 41))

    def __post_init__(self):
        if self.max_rounds < 1:
            raise InvalidParameterError("max_rounds must be at least 1")
        if self.method not in ("param", "nonparam"):
            raise InvalidParameterError(f"unknown inner method {self.method!r}")


@dataclass
class RoundRecord:
    round: int
    sigma: float
    s: float
    a: int
    b: int
    shear: int
    objective: float
    lattice_repeated: bool


@dataclass
class AlternateResult:
    window: np.ndarray
    lattice: Lattice
    params: ChirpedGaussianParams
    rounds: list
    status: str
    cycle: list = None

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["round", "sigma", "s", "a", "b", "shear", "objective", "lattice_repeated"])
            for r in self.rounds:
                w.writerow([r.round, repr(r.sigma), repr(r.s), r.a, r.b, r.shear,
                            repr(r.objective), int(r.lattice_repeated)])


class InnerOptimizerError(RuntimeError):
    def __init__(self, round_index, cause):
        super().__init__(f"round {round_index}: {cause}")
        self.round = round_index
        self.cause = cause


def alternate_optimize(f, cfg):
    """Alternate window optimisation and lattice adaptation.

    Each round optimises the window on the current lattice, then replaces the
    lattice by the rationalised lattice adapted to the window. The loop stops
    at a fixpoint (the new lattice equals the current one), reports an
    oscillation when it returns to an earlier lattice, or gives up after
    ``max_rounds``.
    """
    f = as_signal(f)
    N = f.size
    lattice = cfg.initial_lattice
    seen = [lattice.canonical()]
    params = cfg.start
    rounds = []
    window = None
    status, cycle = "max_rounds", None
    for k in range(1, cfg.max_rounds + 1):
        try:
            if cfg.method == "param":
                params, trace = optimize_parametric(f, lattice, cfg.optim, params)
                window = gaussian_window(params, N)
            else:
                window, trace = optimize_nonparametric(f, lattice, cfg.optim)
                params = fit_chirped_gaussian(window, cfg.sigma_grid, cfg.s_grid)
        except Exception as exc:
            raise InnerOptimizerError(k, exc) from exc
        objective = trace.objective[-1]
        new = rationalize_lattice(adapted_lattice_real(params, N, cfg.redundancy), N)
        key = new.canonical()
        repeated = key in seen
        rounds.append(RoundRecord(k, params.sigma, params.s, new.a, new.b, new.s, objective, repeated))
        if repeated and cfg.lattice_fixpoint:
            if key == lattice.canonical():
                status = "fixpoint"
            else:
                status = "oscillation"
                cycle = seen[seen.index(key):]
            lattice = new
            break
        seen.append(key)
        lattice = new
    return AlternateResult(window, lattice, params, rounds, status, cycle)


def max_track(c):
    """Largest coefficient modulus in every time column."""
    values = c.values if isinstance(c, GaborCoefficients) else np.asarray(c)
    return np.abs(values).max(axis=0)


def count_peaks(column, rel_threshold=0.1):
    """Number of strict local maxima of ``|column|`` above ``rel_threshold * max``.

    The column is treated as non-periodic.
    """
    mag = np.abs(np.asarray(column))
    if mag.size < 3 or mag.max() == 0:
        return int(mag.size > 0 and mag.max() > 0)
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] > mag[2:])
    inner &= mag[1:-1] >= rel_threshold * mag.max()
    return int(inner.sum())


def sparsity_report(f, g, lattice, p=4.0):
    c = dgt(f, g, lattice)
    m = max_track(c)
    return {
        "lp": lp_concentration(c, p),
        "p": p,
        "max_m": float(m.max()),
        "mean_m": float(m.mean()),
    }
