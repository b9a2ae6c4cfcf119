"""Window optimisation by l^p concentration of Gabor coefficients (p > 2).

Three solvers share one objective, ``J(g) = sum_lambda |<f, pi(lambda) g>|^p``:

* ``optimize_nonparametric``: projected gradient ascent on the unit sphere,
* ``optimize_parametric``: BFGS over chirped Gaussians ``(sigma, s)``,
* ``optimize_regularized``: gradient ascent on ``J(g) - lam |h - g|^2``.

Gradients are Wirtinger derivatives with respect to ``conj(g)``. For a
perturbation ``g + eps d`` the directional derivative is
``2 Re <grad, d>``, so the gradient in real coordinates ``(Re g, Im g)`` is
``(2 Re grad, 2 Im grad)``.
"""

import csv
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .dsp import (
    ChirpedGaussianParams,
    as_signal,
    gaussian_window,
    gaussian_window_derivatives,
    tf_center,
)
from .errors import (
    DivergenceError,
    InvalidParameterError,
    StallError,
    UndefinedMeanError,
)
from .gabor import GaborCoefficients, dgt, idgt

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass
class OptimConfig:
    p: float = 4.0
    step: float = 1.0
    lam: float = 0.0
    max_iters: int = 200
    tol: float = 1e-8
    sigma_bounds: tuple = None
    recenter: bool = False
    backtrack: bool = True
    max_halvings: int = 50

    def __post_init__(self):
        if not self.p > 2:
            raise InvalidParameterError(f"p must exceed 2, got {self.p}")
        if not self.step > 0:
            raise InvalidParameterError(f"step must be positive, got {self.step}")
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be non-negative, got {self.lam}")
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise InvalidParameterError(f"tol must be positive, got {self.tol}")
        if self.sigma_bounds is not None:
            lo, hi = (float(v) for v in self.sigma_bounds)
            if not 0 < lo <= hi:
                raise InvalidParameterError(f"invalid sigma bounds {self.sigma_bounds}")
            self.sigma_bounds = (lo, hi)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            data = json.loads(path.read_text())
        data = data.get("optim", data)
        return cls.from_dict(data)


@dataclass
class OptimTrace:
    objective: list = field(default_factory=list)
    step: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    s: list = field(default_factory=list)
    reason: str = ""

    def record(self, objective, step, sigma=math.nan, s=math.nan):
        self.objective.append(float(objective))
        self.step.append(float(step))
        self.sigma.append(float(sigma))
        self.s.append(float(s))

    @property
    def iterations(self):
        return len(self.objective) - 1

    def rows(self):
        for i, row in enumerate(zip(self.objective, self.step, self.sigma, self.s)):
            yield (i, *row)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "objective", "step", "sigma", "s"])
            for row in self.rows():
                w.writerow([row[0], *(repr(v) for v in row[1:])])


def _values(c):
    if isinstance(c, GaborCoefficients):
        return c.values
    return np.asarray(c)


def lp_concentration(c, p):
    """``sum |c|^p``, or ``max |c|`` for ``p = inf``."""
    mag = np.abs(_values(c))
    if np.isinf(p):
        return float(mag.max()) if mag.size else 0.0
    return float(np.sum(mag**p))


def entropy_concentration(c):
    """Shannon entropy ``-sum |c|^2 ln |c|^2`` with ``0 ln 0 = 0``."""
    e = np.abs(_values(c)) ** 2
    e = e[e > 0]
    return float(-np.sum(e * np.log(e)))


def objective_and_gradient(g, f, lattice, p):
    """Objective ``J`` and its Wirtinger gradient in the window.

    The gradient is ``(p/2) sum Gamma <g, pi f> pi f`` with
    ``Gamma = |<g, pi f>|^(p-2)``; the moduli ``|<g, pi f>|`` are those of
    ``|<f, pi g>|`` at the reflected lattice point, so ``J`` comes out of the
    same coefficients.
    """
    c = dgt(g, f, lattice).values
    mag = np.abs(c)
    J = float(np.sum(mag**p))
    grad = 0.5 * p * idgt(mag ** (p - 2) * c, f, lattice)
    return J, grad


def grad_lp_window(g, f, lattice, p):
    if not p > 2:
        raise InvalidParameterError(f"p must exceed 2, got {p}")
    g = as_signal(g, "window")
    if np.linalg.norm(g) == 0:
        raise InvalidParameterError("window must be non-zero")
    return objective_and_gradient(g, as_signal(f), lattice, p)[1]


def _start_window(N):
    # Broad Gaussian: concentrated enough to have a defined TF mean, wide
    # enough not to favour the target shape.
    return gaussian_window(ChirpedGaussianParams(4.0, 0.0), N)


def optimize_nonparametric(f, lattice, cfg, g0=None):
    """Forward-backward ascent: gradient step, then projection on the sphere.

    With ``cfg.backtrack`` the step is halved until the objective does not
    decrease. The returned window is TF-centred once at the end (every
    iteration if ``cfg.recenter``).
    """
    f = as_signal(f)
    if np.linalg.norm(f) == 0:
        raise InvalidParameterError("signal must be non-zero")
    if np.isinf(cfg.p):
        raise InvalidParameterError("the ascent needs a finite p")
    g = _start_window(f.size) if g0 is None else as_signal(g0, "initial window")
    g = g / np.linalg.norm(g)
    if cfg.recenter:
        g = tf_center(g)
    J, G = objective_and_gradient(g, f, lattice, cfg.p)
    gamma = cfg.step
    trace = OptimTrace()
    trace.record(J, gamma)

    for it in range(1, cfg.max_iters + 1):
        for _ in range(cfg.max_halvings + 1):
            cand = g + gamma * G
            cand /= np.linalg.norm(cand)
            if cfg.recenter:
                cand = tf_center(cand)
            Jc, Gc = objective_and_gradient(cand, f, lattice, cfg.p)
            if not np.isfinite(Jc):
                raise DivergenceError(f"non-finite objective at iteration {it}", it, trace)
            if not cfg.backtrack or Jc >= J:
                break
            gamma /= 2
        else:
            trace.reason = "no ascent step"
            break
        change = (Jc - J) / max(abs(J), np.finfo(float).tiny)
        g, J, G = cand, Jc, Gc
        trace.record(J, gamma)
        if abs(change) < cfg.tol:
            trace.reason = "converged"
            break
    else:
        trace.reason = "max_iters"

    if not cfg.recenter:
        try:
            g = tf_center(g)
        except UndefinedMeanError:
            pass
    return g, trace


def parametric_objective(params, f, lattice, p):
    phi = gaussian_window(params, lattice.N)
    return lp_concentration(dgt(f, phi, lattice), p)


def _param_value_and_grad(params, f, lattice, p):
    phi, d_sigma, d_s = gaussian_window_derivatives(params, lattice.N)
    J, grad = objective_and_gradient(phi, f, lattice, p)
    # dJ/dtheta = 2 Re <grad, dphi/dtheta>
    return J, np.array([2 * np.real(np.vdot(d_sigma, grad)), 2 * np.real(np.vdot(d_s, grad))])


def grad_parametric(params, f, lattice, p):
    """Partial derivatives ``(dJ/dsigma, dJ/ds)`` of the p-concentration."""
    if not isinstance(params, ChirpedGaussianParams):
        params = ChirpedGaussianParams(*params)
    if not p > 2:
        raise InvalidParameterError(f"p must exceed 2, got {p}")
    _, d = _param_value_and_grad(params, as_signal(f), lattice, p)
    return float(d[0]), float(d[1])


def _wolfe_search(phi, x, fx, gx, d, c1, c2, max_halvings):
    """Bisection search for a step satisfying the weak Wolfe conditions.

    ``phi`` returns ``(value, gradient)`` or ``None`` if ``x`` is infeasible.
    """
    slope = float(gx @ d)
    lo, hi, alpha = 0.0, math.inf, 1.0
    halvings = 0
    while True:
        out = phi(x + alpha * d)
        if out is None or out[0] > fx + c1 * alpha * slope:
            hi = alpha
        elif float(out[1] @ d) < c2 * slope:
            lo = alpha
        else:
            return alpha, out
        if math.isfinite(hi):
            # every bisection halves the bracket, whichever end moved
            halvings += 1
            if halvings > max_halvings:
                return None
            alpha = 0.5 * (lo + hi)
        else:
            if lo > 1e12:
                return None
            alpha = 2.0 * lo


def optimize_parametric(f, lattice, cfg, start=ChirpedGaussianParams(1.0, 0.0)):
    """BFGS maximisation of ``J(sigma, s)`` with a Wolfe line search.

    The search runs on ``(log sigma, s (N+1))``: widths are scale quantities,
    and the second coordinate is the chirp rate in bins per sample, which
    puts both variables on comparable scales. ``sigma`` is clamped to ``cfg.sigma_bounds`` after every step and
    a bound that blocks the ascent freezes that coordinate. Stops when the
    projected gradient norm falls below ``cfg.tol * (1 + |J|)``, or when the
    line search can no longer resolve the objective at that precision.
    """
    f = as_signal(f)
    if np.linalg.norm(f) == 0:
        raise InvalidParameterError("signal must be non-zero")
    if not isinstance(start, ChirpedGaussianParams):
        start = ChirpedGaussianParams(*start)
    bounds = cfg.sigma_bounds
    if bounds is not None and not bounds[0] <= start.sigma <= bounds[1]:
        raise InvalidParameterError(f"start sigma {start.sigma} outside bounds {bounds}")
    c1, c2 = 1e-4, 0.9
    rate = lattice.N + 1.0
    log_bounds = None if bounds is None else (math.log(bounds[0]), math.log(bounds[1]))

    def params_of(u):
        return ChirpedGaussianParams(math.exp(u[0]), float(u[1] / rate))

    def neg(u):
        # outside exp(+-40) the window is numerically a delta or a constant
        if not (np.all(np.isfinite(u)) and abs(u[0]) < 40):
            return None
        params = params_of(u)
        J, grad = _param_value_and_grad(params, f, lattice, cfg.p)
        if not np.isfinite(J):
            return None
        return -J, -grad * np.array([params.sigma, 1.0 / rate])

    def clamp(u):
        if log_bounds is None:
            return u
        return np.array([min(max(u[0], log_bounds[0]), log_bounds[1]), u[1]])

    def project(u, gu):
        gp = gu.copy()
        if log_bounds is not None:
            if u[0] <= log_bounds[0] and gp[0] > 0:
                gp[0] = 0.0
            if u[0] >= log_bounds[1] and gp[0] < 0:
                gp[0] = 0.0
        return gp

    u = np.array([math.log(start.sigma), start.s * rate])
    fu, gu = neg(u)
    H = np.eye(2)
    trace = OptimTrace()
    trace.record(-fu, 0.0, start.sigma, start.s)

    for it in range(1, cfg.max_iters + 1):
        gp = project(u, gu)
        gnorm = np.linalg.norm(gp)
        if gnorm < cfg.tol * (1 + abs(fu)):
            trace.reason = "converged"
            break
        d = -H @ gp
        if gp[0] == 0 and gu[0] != 0:
            d[0] = 0.0
        if d @ gp >= 0:
            H = np.eye(2)
            d = -gp
        found = _wolfe_search(neg, u, fu, gp, d, c1, c2, cfg.max_halvings)
        if found is None:
            if gnorm < np.sqrt(np.finfo(float).eps) * (1 + abs(fu)):
                trace.reason = "precision limit"
                break
            trace.reason = "line search failed"
            raise StallError(f"line search failed at iteration {it}", trace)
        alpha, (f_new, g_new) = found
        u_new = clamp(u + alpha * d)
        if not np.array_equal(u_new, u + alpha * d):
            f_new, g_new = neg(u_new)
        step = u_new - u
        y = g_new - gu
        sy = float(step @ y)
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(y):
            if it == 1:
                H = np.eye(2) * sy / float(y @ y)
            rho = 1.0 / sy
            V = np.eye(2) - rho * np.outer(step, y)
            H = V @ H @ V.T + rho * np.outer(step, step)
        u, fu, gu = u_new, f_new, g_new
        current = params_of(u)
        trace.record(-fu, alpha, current.sigma, current.s)
    else:
        trace.reason = "max_iters"

    return params_of(u), trace


def regularized_objective(g, f, lattice, h, p, lam):
    c = dgt(f, g, lattice)
    return lp_concentration(c, p) - lam * float(np.linalg.norm(h - g) ** 2)


def optimize_regularized(f, lattice, h, cfg, g0=None, max_norm=1e6):
    """Ascent on ``J(g) - lam |h - g|^2`` without a norm constraint.

    Update: ``g <- (1 - step lam) g + step lam h + step grad J(g)``, with the
    step halved whenever the objective would decrease.
    """
    f = as_signal(f)
    h = as_signal(h, "reference window")
    lam = cfg.lam
    if not lam > 0:
        raise InvalidParameterError("regularisation weight lam must be positive")
    if abs(np.linalg.norm(h) - 1) > 1e-9:
        raise InvalidParameterError("reference window must have unit norm")
    if not cfg.step * lam < 1:
        raise InvalidParameterError(f"step * lam = {cfg.step * lam} must be below 1")
    g = h.copy() if g0 is None else as_signal(g0, "initial window")

    def value_and_grad(v):
        J, G = objective_and_gradient(v, f, lattice, cfg.p)
        return J - lam * float(np.linalg.norm(h - v) ** 2), G

    F, G = value_and_grad(g)
    gamma = cfg.step
    trace = OptimTrace()
    trace.record(F, gamma)
    for it in range(1, cfg.max_iters + 1):
        for _ in range(cfg.max_halvings + 1):
            cand = (1 - gamma * lam) * g + gamma * lam * h + gamma * G
            Fc, Gc = value_and_grad(cand)
            if not np.isfinite(Fc) or np.linalg.norm(cand) > max_norm:
                raise DivergenceError(f"iterate diverged at iteration {it}", it, trace)
            if not cfg.backtrack or Fc >= F:
                break
            gamma /= 2
        else:
            trace.reason = "no ascent step"
            break
        change = (Fc - F) / max(abs(F), np.finfo(float).tiny)
        g, F, G = cand, Fc, Gc
        trace.record(F, gamma)
        if abs(change) < cfg.tol:
            trace.reason = "converged"
            break
    else:
        trace.reason = "max_iters"
    return g, trace
