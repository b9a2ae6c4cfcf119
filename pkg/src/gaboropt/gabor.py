"""Discrete Gabor transforms on lattices in lower-triangular normal form.

A lattice ``(a, b, s)`` over ``Z_N^2`` is generated by the columns of
``[[a, 0], [s, b]]``. Time column ``n`` sits at ``x = n a`` and carries the
frequencies ``xi = m b + n s (mod N)``. The shear ``s`` is therefore the
frequency offset (in bins) added per time step; a lattice obtained from a
rectangular one by the chirp rate ``r`` (``xi' = xi + r x``) has ``s = a r``.

Coefficients use the convention that is linear in the signal,

    V_g f(x, xi) = <f, M_xi T_x g> = sum_t f(t) conj(M_xi T_x g(t)),

stored in a matrix with ``N/b`` frequency rows and ``N/a`` time columns.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .dsp import MIN_LENGTH, as_signal, centered_grid, chirp, chirp_phase, tf_shift
from .errors import DimensionError, InvalidLatticeError, NotAFrameError

DENSE_LIMIT = 512


@dataclass(frozen=True)
class Lattice:
    a: int
    b: int
    s: int
    N: int

    def __post_init__(self):
        a, b, s, N = self.a, self.b, self.s, self.N
        for name, v in (("a", a), ("b", b), ("s", s), ("N", N)):
            if int(v) != v:
                raise InvalidLatticeError(f"lattice parameter {name}={v} is not an integer")
        if N < MIN_LENGTH:
            raise InvalidLatticeError(f"N={N} is below the minimum {MIN_LENGTH}")
        if a <= 0 or N % a:
            raise InvalidLatticeError(f"time step a={a} does not divide N={N}")
        if b <= 0 or N % b:
            raise InvalidLatticeError(f"frequency step b={b} does not divide N={N}")
        if s % self.shear_step:
            raise InvalidLatticeError(
                f"shear s={s} is not a multiple of b/gcd(N/a, b)={self.shear_step}"
            )
        object.__setattr__(self, "a", int(a))
        object.__setattr__(self, "b", int(b))
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "s", int(s) % int(N))

    @property
    def shear_step(self):
        return self.b // gcd(self.N // self.a, self.b)

    @property
    def redundancy(self):
        return self.N / (self.a * self.b)

    R = redundancy

    @property
    def n_time(self):
        return self.N // self.a

    @property
    def n_freq(self):
        return self.N // self.b

    @property
    def shape(self):
        return (self.n_freq, self.n_time)

    @property
    def chirp_rate(self):
        """Integer chirp rate ``s / a`` if the shear is one, else ``None``."""
        return self.s // self.a if self.s % self.a == 0 else None

    def canonical(self):
        """Same point set with the shear reduced modulo ``b``."""
        return Lattice(self.a, self.b, self.s % self.b, self.N)

    def same_points(self, other):
        return self.canonical() == other.canonical()

    def column_offsets(self):
        return (np.arange(self.n_time) * self.s) % self.N

    @classmethod
    def full(cls, N):
        return cls(1, 1, 0, N)

    @classmethod
    def from_chirp_rate(cls, a, b, rate, N):
        """Lattice ``xi' = m b + rate * x`` obtained by shearing ``(a, b, 0)``."""
        return cls(a, b, int(a) * int(rate), N)

    def to_dict(self):
        return {"a": self.a, "b": self.b, "s": self.s, "N": self.N, "R": self.redundancy}


def lattice_new(a, b, shear_k, N):
    """Build the lattice with shear ``s = shear_k * b / gcd(N/a, b)``."""
    if N < MIN_LENGTH:
        raise InvalidLatticeError(f"N={N} is below the minimum {MIN_LENGTH}")
    if a <= 0 or N % a:
        raise InvalidLatticeError(f"time step a={a} does not divide N={N}")
    if b <= 0 or N % b:
        raise InvalidLatticeError(f"frequency step b={b} does not divide N={N}")
    step = b // gcd(N // a, b)
    return Lattice(a, b, shear_k * step, N)


def lattice_points(lattice):
    """All lattice points as an ``(N R, 2)`` integer array of ``(x, xi)``.

    Ordering matches ``GaborCoefficients.values.ravel(order="F")``: columns
    in time order, frequencies within a column in row order.
    """
    n = np.repeat(np.arange(lattice.n_time), lattice.n_freq)
    m = np.tile(np.arange(lattice.n_freq), lattice.n_time)
    x = n * lattice.a
    xi = (m * lattice.b + n * lattice.s) % lattice.N
    return np.stack([x, xi], axis=1)


@dataclass
class GaborCoefficients:
    values: np.ndarray
    lattice: Lattice

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.lattice.shape:
            raise DimensionError(
                f"coefficient shape {self.values.shape} does not match lattice shape {self.lattice.shape}"
            )

    def points(self):
        return lattice_points(self.lattice)

    def flat(self):
        return self.values.ravel(order="F")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float

    @property
    def condition(self):
        return self.B / self.A if self.A > 0 else np.inf


@dataclass(frozen=True)
class BoundaryReport:
    ok: bool
    max_ratio: float
    bound: float
    violation: tuple = None


def _check_pair(f, g, lattice):
    f = as_signal(f, "signal")
    g = as_signal(g, "window")
    if f.size != g.size:
        raise DimensionError(f"signal length {f.size} differs from window length {g.size}")
    if lattice is not None and lattice.N != f.size:
        raise DimensionError(f"lattice is for N={lattice.N}, signal has length {f.size}")
    return f, g


def _window_columns(g, a, n_time):
    N = g.size
    idx = (np.arange(N)[None, :] - a * np.arange(n_time)[:, None]) % N
    return g[idx]


def _analysis(f, g, a, b, offsets):
    """Per-column FFT evaluation of ``<f, M_(m b + o_n) T_(n a) g>``."""
    N = f.size
    n_time, L = N // a, N // b
    prod = f[None, :] * np.conj(_window_columns(g, a, n_time))
    if np.any(offsets):
        prod *= np.exp(-2j * np.pi * np.outer(offsets, np.arange(N)) / N)
    folded = prod.reshape(n_time, b, L).sum(axis=1)
    return np.fft.fft(folded, axis=1).T


def _synthesis(c, g, a, b, offsets):
    """``sum c[m, n] M_(m b + o_n) T_(n a) g``."""
    N = g.size
    n_time, L = N // a, N // b
    per_col = L * np.fft.ifft(c.T, axis=1)
    atoms = np.tile(per_col, (1, b)) * _window_columns(g, a, n_time)
    if np.any(offsets):
        atoms *= np.exp(2j * np.pi * np.outer(offsets, np.arange(N)) / N)
    return atoms.sum(axis=0)


def _shear_phase(lattice, rate):
    x = np.arange(lattice.n_time) * lattice.a
    return np.conj(chirp_phase(lattice.N, rate, x))


def dgt_direct(f, g, lattice):
    """Reference evaluation by explicit inner products; O(N^2 R)."""
    f, g = _check_pair(f, g, lattice)
    out = np.empty(lattice.shape, dtype=np.complex128)
    for n in range(lattice.n_time):
        x = n * lattice.a
        for m in range(lattice.n_freq):
            xi = m * lattice.b + n * lattice.s
            out[m, n] = np.sum(f * np.conj(tf_shift(g, x, xi)))
    return GaborCoefficients(out, lattice)


def dgt(f, g, lattice, method="auto"):
    """Gabor coefficients of ``f`` with window ``g`` on ``lattice``.

    ``method`` is ``"chirp"`` (chirp the pair by ``-s/a`` and use the
    rectangular transform; needs an integer chirp rate), ``"offset"``
    (per-column frequency offset, any lattice), ``"direct"`` (explicit inner
    products) or ``"auto"``.
    """
    f, g = _check_pair(f, g, lattice)
    a, b = lattice.a, lattice.b
    if method == "auto":
        method = "chirp" if lattice.chirp_rate is not None else "offset"
    if method == "direct":
        return dgt_direct(f, g, lattice)
    if method == "chirp":
        rate = lattice.chirp_rate
        if rate is None:
            raise InvalidLatticeError(f"shear s={lattice.s} is not an integer chirp rate for a={a}")
        if rate == 0:
            return GaborCoefficients(_analysis(f, g, a, b, None), lattice)
        c = _analysis(chirp(f, -rate), chirp(g, -rate), a, b, None)
        return GaborCoefficients(c * _shear_phase(lattice, rate)[None, :], lattice)
    if method == "offset":
        return GaborCoefficients(_analysis(f, g, a, b, lattice.column_offsets()), lattice)
    raise ValueError(f"unknown method {method!r}")


def idgt(c, g_d, lattice=None):
    """Synthesis ``sum_lambda c(lambda) M_xi T_x g_d``."""
    if isinstance(c, GaborCoefficients):
        lattice = lattice or c.lattice
        values = c.values
    else:
        values = np.asarray(c, dtype=np.complex128)
    if lattice is None:
        raise DimensionError("a lattice is required to synthesise raw coefficient arrays")
    g_d = as_signal(g_d, "dual window")
    if g_d.size != lattice.N:
        raise DimensionError(f"window length {g_d.size} does not match lattice N={lattice.N}")
    if values.shape != lattice.shape:
        raise DimensionError(f"coefficient shape {values.shape} does not match lattice {lattice.shape}")
    return _synthesis(values, g_d, lattice.a, lattice.b, lattice.column_offsets())


def mask_operator(g, f, lattice, mask, method="auto"):
    """Gabor multiplier ``sum Gamma(lambda) <g, M_xi T_x f> M_xi T_x f``.

    ``f`` plays the role of the window. For integer chirp rates the sheared
    lattice is handled by chirping both vectors by ``-s/a``, applying the
    rectangular multiplier and chirping back; the shear phase cancels.
    """
    g, f = _check_pair(g, f, lattice)
    mask = np.asarray(mask, dtype=float)
    if mask.ndim == 0:
        mask = np.full(lattice.shape, float(mask))
    if mask.shape != lattice.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match lattice shape {lattice.shape}")
    a, b = lattice.a, lattice.b
    if method == "auto":
        method = "chirp" if lattice.chirp_rate is not None else "offset"
    if method == "chirp" and lattice.chirp_rate:
        rate = lattice.chirp_rate
        gc, fc = chirp(g, -rate), chirp(f, -rate)
        c = _analysis(gc, fc, a, b, None)
        return chirp(_synthesis(mask * c, fc, a, b, None), rate)
    if method == "direct":
        out = np.zeros(lattice.N, dtype=np.complex128)
        for (x, xi), w in zip(lattice_points(lattice), mask.ravel(order="F")):
            atom = tf_shift(f, x, xi)
            out += w * np.sum(g * np.conj(atom)) * atom
        return out
    offsets = lattice.column_offsets()
    c = _analysis(g, f, a, b, offsets)
    return _synthesis(mask * c, f, a, b, offsets)


def frame_operator_matrix(g, lattice):
    """Dense frame operator ``S = sum_lambda pi(lambda) g (pi(lambda) g)^H``.

    Uses ``S[t, t'] = (N/b) sum_n g(t - na) conj(g(t' - na))
    exp(2 pi i n s (t - t')/N)`` restricted to ``t = t' (mod N/b)``.
    """
    g = as_signal(g, "window")
    N = g.size
    if lattice.N != N:
        raise DimensionError(f"lattice is for N={lattice.N}, window has length {N}")
    L = lattice.n_freq
    t = np.arange(N)
    diff = t[:, None] - t[None, :]
    support = (diff % L) == 0
    S = np.zeros((N, N), dtype=np.complex128)
    cols = _window_columns(g, lattice.a, lattice.n_time)
    for n, offset in enumerate(lattice.column_offsets()):
        term = np.outer(cols[n], np.conj(cols[n]))
        if offset:
            term = term * np.exp(2j * np.pi * offset * diff / N)
        S += term
    S *= (N // lattice.b) * support
    return S


def frame_operator(g, lattice):
    """Matrix-free frame operator as a ``scipy.sparse.linalg.LinearOperator``."""
    g = as_signal(g, "window")
    N = lattice.N
    ones = np.ones(lattice.shape)

    def matvec(v):
        return mask_operator(np.ravel(v), g, lattice, ones)

    return spla.LinearOperator((N, N), matvec=matvec, rmatvec=matvec, dtype=np.complex128)


def frame_bounds(g, lattice):
    """Extreme eigenvalues of the frame operator."""
    g = as_signal(g, "window")
    if lattice.N <= DENSE_LIMIT:
        ev = scipy.linalg.eigvalsh(frame_operator_matrix(g, lattice))
        return FrameBounds(float(max(ev[0], 0.0)), float(ev[-1]))
    op = frame_operator(g, lattice)
    B = float(spla.eigsh(op, k=1, which="LA", tol=1e-10, return_eigenvectors=False)[0])
    shifted = spla.LinearOperator(op.shape, matvec=lambda v: B * v - op.matvec(v), dtype=op.dtype)
    top = float(spla.eigsh(shifted, k=1, which="LA", tol=1e-10, return_eigenvectors=False)[0])
    return FrameBounds(max(B - top, 0.0), B)


def dual_window(g, lattice, min_ratio=1e-10):
    """Canonical dual window ``S^{-1} g``."""
    g = as_signal(g, "window")
    if lattice.N <= DENSE_LIMIT:
        S = frame_operator_matrix(g, lattice)
        ev, vecs = scipy.linalg.eigh(S)
        if ev[-1] <= 0 or ev[0] / ev[-1] < min_ratio:
            raise NotAFrameError(
                f"frame operator is numerically singular (A/B = {ev[0] / ev[-1]:.3e})"
            )
        return vecs @ ((vecs.conj().T @ g) / ev)
    bounds = frame_bounds(g, lattice)
    if bounds.B <= 0 or bounds.A / bounds.B < min_ratio:
        raise NotAFrameError(f"frame operator is numerically singular (A/B = {bounds.A / bounds.B:.3e})")
    gd, info = spla.cg(frame_operator(g, lattice), g, rtol=1e-13, atol=0.0, maxiter=10 * lattice.N)
    if info != 0:
        raise NotAFrameError(f"conjugate gradient did not converge (info={info})")
    return gd


def boundary_energy_check(f, g, eps):
    """Check that far time shifts carry at most ``eps sqrt(N) (|f| + |g|)``.

    Both signals are expected to be centred at ``N/2`` with samples outside
    ``[N/2 - N/8, N/2 + N/8]`` bounded by ``eps``. A failed precondition is
    reported through ``violation = (signal name, index, |value|)``.
    """
    f, g = _check_pair(f, g, None)
    N = f.size
    t = np.arange(N)
    outside = (t < N / 2 - N / 8) | (t > N / 2 + N / 8)
    bound = eps * np.sqrt(N) * (np.linalg.norm(f) + np.linalg.norm(g))
    for name, v in (("f", f), ("g", g)):
        bad = np.nonzero(outside & (np.abs(v) > eps))[0]
        if bad.size:
            i = int(bad[0])
            return BoundaryReport(False, np.nan, bound, (name, i, float(abs(v[i]))))
    coeffs = dgt(f, g, Lattice.full(N)).values
    far = np.abs(centered_grid(N)) > N / 4
    peak = np.abs(coeffs[:, far]).max() if np.any(far) else 0.0
    ratio = peak / bound if bound > 0 else (0.0 if peak == 0 else np.inf)
    return BoundaryReport(bool(ratio <= 1.0), float(ratio), float(bound))
