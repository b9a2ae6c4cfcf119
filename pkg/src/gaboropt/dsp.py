"""Elementary operators on periodic signals of length N.

Signals are plain one-dimensional complex numpy arrays; every index is read
modulo N. Translation ``T_x`` and modulation ``M_xi`` follow

    T_x g(t) = g(t - x),    M_xi g(t) = exp(2 pi i xi t / N) g(t),

and ``tf_shift`` applies ``M_xi T_x`` (translate first, then modulate).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidParameterError, UndefinedMeanError

MIN_LENGTH = 4


def as_signal(g, name="signal"):
    """Return ``g`` as a fresh complex128 vector, checking shape and length."""
    arr = np.array(g, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < MIN_LENGTH:
        raise DimensionError(f"{name} length {arr.size} is below the minimum {MIN_LENGTH}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite samples")
    return arr


def centered_grid(N):
    """Signed time value of each index: ``t`` in ``{-floor(N/2), ..., ceil(N/2)-1}``."""
    n = np.arange(N)
    return np.where(n < (N + 1) // 2, n, n - N).astype(float)


def dft(g, inverse=False):
    """Unitary DFT (``1/sqrt(N)`` in both directions)."""
    g = np.asarray(g, dtype=np.complex128)
    if inverse:
        return np.fft.ifft(g, norm="ortho")
    return np.fft.fft(g, norm="ortho")


def tf_shift(g, x, xi=0):
    """Return ``M_xi T_x g``."""
    g = np.asarray(g, dtype=np.complex128)
    N = g.size
    x = int(x) % N
    xi = int(xi) % N
    out = np.roll(g, x)
    if xi:
        out = out * np.exp(2j * np.pi * xi * np.arange(N) / N)
    return out


def chirp_phase(N, s, t=None):
    """Samples of ``exp(i pi s t^2 (N+1)/N)``; ``t`` defaults to ``0..N-1``."""
    if t is None:
        t = np.arange(N, dtype=float)
    # For integer s the phase is N-periodic; reduce t^2 modulo 2N to keep the
    # argument small and the values exact-ish for large N.
    if float(s).is_integer():
        tt = np.mod(np.asarray(t, dtype=np.int64) ** 2, 2 * N).astype(float)
    else:
        tt = np.asarray(t, dtype=float) ** 2
    return np.exp(1j * np.pi * s * tt * (N + 1) / N)


def chirp(g, s):
    """Chirping operator ``U_s g(n) = exp(i pi s n^2 (N+1)/N) g(n)``.

    Any real ``s`` is accepted. Only integer rates commute with cyclic
    translation up to a phase; fractional rates are an approximation that is
    adequate for signals concentrated away from the period boundary.
    """
    g = np.asarray(g, dtype=np.complex128)
    if s == 0:
        return g.copy()
    return chirp_phase(g.size, s) * g


@dataclass(frozen=True)
class ChirpedGaussianParams:
    """Width ``sigma`` (relative to N) and chirp parameter ``s``."""

    sigma: float
    s: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma}")
        if not np.isfinite(self.s):
            raise InvalidParameterError(f"chirp rate must be finite, got {self.s}")

    def clamp(self, bounds):
        if bounds is None:
            return self
        lo, hi = bounds
        return ChirpedGaussianParams(float(min(max(self.sigma, lo), hi)), self.s)


def _raw_gaussian(sigma, s, N):
    t = centered_grid(N)
    amp = (2.0 / (N * sigma)) ** 0.25
    return t, amp * np.exp(-np.pi * t**2 / (N * sigma)) * chirp_phase(N, s, t)


def gaussian_window(params, N, normalize=True):
    """Chirped, dilated Gaussian centred at index 0.

    The closed form is evaluated on the symmetric range and wrapped; with
    ``normalize`` (the default) the result has unit l2 norm exactly.
    """
    if not isinstance(params, ChirpedGaussianParams):
        params = ChirpedGaussianParams(*params)
    if N < MIN_LENGTH:
        raise DimensionError(f"window length {N} is below the minimum {MIN_LENGTH}")
    _, phi = _raw_gaussian(params.sigma, params.s, N)
    if normalize:
        phi = phi / np.linalg.norm(phi)
    return phi


def gaussian_window_derivatives(params, N):
    """Unit-norm window and its partial derivatives in ``sigma`` and ``s``.

    The derivatives of the closed form are

        d phi / d sigma = (pi t^2 / (sigma^2 N) - 1 / (4 sigma)) phi
        d phi / d s     = i pi t^2 (N+1)/N phi

    and are then pushed through the renormalisation ``phi / ||phi||`` so that
    they are exact for the window actually returned by ``gaussian_window``.
    """
    if not isinstance(params, ChirpedGaussianParams):
        params = ChirpedGaussianParams(*params)
    sigma, s = params.sigma, params.s
    t, phi = _raw_gaussian(sigma, s, N)
    d_sigma = (np.pi * t**2 / (sigma**2 * N) - 1.0 / (4.0 * sigma)) * phi
    d_s = 1j * np.pi * t**2 * (N + 1) / N * phi

    norm = np.linalg.norm(phi)
    unit = phi / norm

    def through_norm(d):
        # d(phi/|phi|) = d/|phi| - unit * Re<d, unit>/|phi|
        return (d - unit * np.real(np.vdot(unit, d))) / norm

    return unit, through_norm(d_sigma), through_norm(d_s)


def _circular_mean(weights, N, scale):
    resultant = np.sum(np.exp(2j * np.pi * np.arange(N) / N) * weights)
    if abs(resultant) < 1e-12 * scale:
        return np.nan
    return N * np.angle(resultant) / (2 * np.pi)


def tf_mean(g):
    """Von Mises time and frequency means as real indices in ``(-N/2, N/2]``.

    An axis along which the energy is spread perfectly evenly (vanishing
    resultant) has no mean and is reported as NaN; if both axes are spread,
    or ``g`` is zero, ``UndefinedMeanError`` is raised.
    """
    g = np.asarray(g, dtype=np.complex128)
    energy = np.vdot(g, g).real
    if energy == 0:
        raise UndefinedMeanError("circular mean undefined for the zero signal")
    N = g.size
    mu_t = _circular_mean(np.abs(g) ** 2, N, energy)
    mu_f = _circular_mean(np.abs(dft(g)) ** 2, N, energy)
    if np.isnan(mu_t) and np.isnan(mu_f):
        raise UndefinedMeanError("circular mean undefined: signal is spread uniformly in time and frequency")
    return mu_t, mu_f


def tf_center(g, return_shift=False):
    """Move the time-frequency mean of ``g`` to the origin.

    Shifts are the means rounded to the nearest integer, so the result has
    ``|mu_t|, |mu_f| <= 1/2`` up to rounding of exact half-integers. An axis
    without a mean is left in place.
    """
    mu_t, mu_f = tf_mean(g)
    x = 0 if np.isnan(mu_t) else int(np.floor(mu_t + 0.5))
    xi = 0 if np.isnan(mu_f) else int(np.floor(mu_f + 0.5))
    out = tf_shift(g, -x, -xi)
    if return_shift:
        return out, (x, xi)
    return out
