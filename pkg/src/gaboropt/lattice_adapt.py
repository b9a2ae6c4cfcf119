"""Lattices adapted to chirped Gaussian windows.

The real-valued generator is the hexagonal lattice, dilated by ``sigma`` and
sheared by the chirp rate ``s``, at a requested redundancy ``R``:

    sqrt(N/R) [[1, 0], [s, 1]] [[sqrt(sigma), 0], [0, 1/sqrt(sigma)]] H,
    H = [[3^(1/4)/sqrt(2), 0], [1/(3^(1/4) sqrt(2)), sqrt(2)/3^(1/4)]].

``s`` here is the time-frequency shear in bins per sample. A window
parameter ``s`` (see ``gaussian_window``) sweeps ``s (N+1)`` bins per sample,
taken modulo N; the two agree for integer ``s``, and ``shear_rate`` performs
the conversion for fractional ones.

``rationalize_lattice`` then picks the nearest feasible normal form.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .dsp import ChirpedGaussianParams, as_signal, gaussian_window
from .errors import InvalidParameterError
from .gabor import Lattice

_Q = 3.0**0.25
HEX_SHAPE = np.array([[_Q / math.sqrt(2), 0.0], [1.0 / (_Q * math.sqrt(2)), math.sqrt(2) / _Q]])


@dataclass(frozen=True)
class GeneratorMatrix:
    """Lower-triangular real generator ``[[time_step, 0], [shear, freq_step]]``."""

    time_step: float
    shear: float
    freq_step: float
    N: int
    R: float = math.nan

    @property
    def matrix(self):
        return np.array([[self.time_step, 0.0], [self.shear, self.freq_step]])

    @property
    def determinant(self):
        return self.time_step * self.freq_step

    def to_dict(self):
        return {
            "m11": self.time_step,
            "m12": 0.0,
            "m21": self.shear,
            "m22": self.freq_step,
            "N": self.N,
            "R": self.R,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def shear_rate(s, N):
    """Shear (bins per sample, in ``[-N/2, N/2)``) swept by the chirp ``exp(i pi s t^2 (N+1)/N)``."""
    if float(s).is_integer():
        r = float(s)
    else:
        r = s * (N + 1)
    return (r + N / 2) % N - N / 2


def adapted_lattice_real(params, N, R):
    if not isinstance(params, ChirpedGaussianParams):
        params = ChirpedGaussianParams(*params)
    if not R >= 1:
        raise InvalidParameterError(f"redundancy must be at least 1, got {R}")
    shear = np.array([[1.0, 0.0], [shear_rate(params.s, N), 1.0]])
    dilation = np.diag([math.sqrt(params.sigma), 1.0 / math.sqrt(params.sigma)])
    M = math.sqrt(N / R) * shear @ dilation @ HEX_SHAPE
    return GeneratorMatrix(float(M[0, 0]), float(M[1, 0]), float(M[1, 1]), int(N), float(R))


def divisors(N):
    small = [d for d in range(1, math.isqrt(N) + 1) if N % d == 0]
    return sorted(set(small + [N // d for d in small]))


def _nearest_divisor(N, target):
    # ties go to the smaller divisor: min() keeps the first of equal keys
    log_t = math.log(target)
    return min(divisors(N), key=lambda d: abs(math.log(d) - log_t))


def rationalize_lattice(M, N=None):
    """Closest feasible normal-form lattice to a real generator.

    Steps are matched in log distance over the divisors of ``N``; the shear is
    the nearest multiple of ``b / gcd(N/a, b)`` in absolute distance. Ties go
    to the smaller value.
    """
    N = M.N if N is None else N
    if not (M.time_step > 0 and M.freq_step > 0):
        raise InvalidParameterError("generator must have a positive diagonal")
    a = _nearest_divisor(N, M.time_step)
    b = _nearest_divisor(N, M.freq_step)
    step = b // math.gcd(N // a, b)
    lower = math.floor(M.shear / step) * step
    upper = lower + step
    s = lower if abs(M.shear - lower) <= abs(upper - M.shear) else upper
    return Lattice(a, b, s, N)


def adapted_lattice(params, N, R):
    return rationalize_lattice(adapted_lattice_real(params, N, R), N)


def fit_chirped_gaussian(g, sigma_grid, s_grid):
    """Grid point maximising ``|<phi_(sigma, s), g>|``.

    Ties are broken towards smaller ``sigma``, then smaller ``|s|``.
    """
    g = as_signal(g, "window")
    if np.linalg.norm(g) == 0:
        raise InvalidParameterError("window must be non-zero")
    sigma_grid = sorted(float(v) for v in sigma_grid)
    s_grid = sorted((float(v) for v in s_grid), key=abs)
    if not sigma_grid or not s_grid:
        raise InvalidParameterError("grids must be non-empty")
    best, best_val = None, -1.0
    for sigma in sigma_grid:
        for s in s_grid:
            params = ChirpedGaussianParams(sigma, s)
            val = abs(np.vdot(gaussian_window(params, g.size), g))
            if val > best_val * (1 + 1e-12):
                best, best_val = params, val
    return best
