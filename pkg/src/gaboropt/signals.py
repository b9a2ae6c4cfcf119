"""Synthetic test signals."""

from dataclasses import dataclass, field

import numpy as np

from .dsp import MIN_LENGTH, ChirpedGaussianParams, gaussian_window, tf_shift
from .errors import DimensionError, InvalidParameterError

KINDS = ("quadchirp", "multitone", "gauss_atom", "chirped_gauss")


def _default_tones():
    # three components 12 bins apart around bin 200 of a 1024-sample signal
    return tuple(2 * np.pi * k / 1024 for k in (188, 200, 212))


@dataclass(frozen=True)
class SignalSpec:
    """Parameters of a synthetic signal.

    quadchirp
        Real chirp whose instantaneous frequency rises quadratically from
        ``f_start`` to ``f_stop`` (in bins) over the signal.
    multitone
        ``sum_i cos(b cos(c t) + a_i t + theta)``; ``a_i`` and ``c`` are in
        radians per sample, so every component shares the same modulation.
    gauss_atom, chirped_gauss
        ``gaussian_window((sigma, s), N)`` moved to ``(t0, f0)``; ``gauss_atom``
        ignores ``s``.

    ``noise`` is the standard deviation of additive white noise drawn from
    ``seed`` (real noise for real kinds, circular complex noise otherwise).
    """

    kind: str
    N: int = 1024
    f_start: float = 32.0
    f_stop: float = 288.0
    a: tuple = field(default_factory=_default_tones)
    b: float = 40.0
    c: float = 2 * np.pi / 1024
    theta: float = 0.0
    sigma: float = 1.0
    s: float = 0.0
    t0: int = 0
    f0: int = 0
    noise: float = 0.0
    seed: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown signal kind {self.kind!r}; expected one of {KINDS}")
        if int(self.N) != self.N or self.N < MIN_LENGTH:
            raise DimensionError(f"N must be an integer >= {MIN_LENGTH}, got {self.N}")
        object.__setattr__(self, "a", tuple(float(v) for v in np.atleast_1d(self.a)))
        values = [self.f_start, self.f_stop, self.b, self.c, self.theta, self.sigma, self.s, self.noise, *self.a]
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("signal parameters must be finite")
        if self.kind == "multitone" and not self.a:
            raise InvalidParameterError("multitone needs at least one component")
        if self.noise < 0:
            raise InvalidParameterError("noise level must be non-negative")
        if self.sigma <= 0:
            raise InvalidParameterError("sigma must be positive")


def _quadchirp(spec):
    N = spec.N
    t = np.arange(N, dtype=float)
    span = spec.f_stop - spec.f_start
    # phase is 2 pi / N times the running sum of nu(t) = f_start + span (t/N)^2
    phase = 2 * np.pi / N * (spec.f_start * t + span * t**3 / (3 * N**2))
    return np.cos(phase)


def _multitone(spec):
    t = np.arange(spec.N, dtype=float)
    mod = spec.b * np.cos(spec.c * t)
    return sum(np.cos(mod + a * t + spec.theta) for a in spec.a)


def gen_signal(spec):
    """Generate the signal described by ``spec`` as a complex vector."""
    if spec.kind == "quadchirp":
        f = _quadchirp(spec).astype(np.complex128)
    elif spec.kind == "multitone":
        f = _multitone(spec).astype(np.complex128)
    else:
        s = spec.s if spec.kind == "chirped_gauss" else 0.0
        f = gaussian_window(ChirpedGaussianParams(spec.sigma, s), spec.N)
        f = tf_shift(f, spec.t0, spec.f0)
    if spec.noise > 0:
        rng = np.random.default_rng(spec.seed)
        if spec.kind in ("quadchirp", "multitone"):
            f = f + spec.noise * rng.standard_normal(spec.N)
        else:
            f = f + spec.noise / np.sqrt(2) * (rng.standard_normal(spec.N) + 1j * rng.standard_normal(spec.N))
    return f
