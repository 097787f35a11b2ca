"""Goodwin growth-cycle model: parameters, curves, equilibria, Lyapunov function.

The deterministic system on ``D = (0, inf) x (0, 1)`` is::

    dx = x (Phi(y) - alpha) dt
    dy = y (kappa(x) - gamma) dt

and its Brownian perturbation adds ``sigma(y)**2 dt + sigma(y) dW`` to both
relative growth rates.  ``x`` is the wage share, ``y`` the employment rate.

The shipped preset uses Say's law ``kappa(x) = (1 - x)/nu``, the Keen
Phillips curve ``Phi(y) = phi1/(1 - y)**2 + phi0`` and
``sigma(y) = sigma0 (1 - y)``.  Arbitrary monotone curves can be supplied
through :class:`CurveSet`; the Lyapunov function is then evaluated by
adaptive quadrature.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property

import numpy as np
from scipy import integrate

from .roots import RootFindingError, bracketed_root, expand_upper


class GoodwinError(Exception):
    """Base class for model errors."""


class ConfigError(GoodwinError, ValueError):
    """Malformed or incomplete parameter document."""


class InfeasibleParametersError(GoodwinError, ValueError):
    """Parameters violate the feasibility part of the curve assumptions."""


class AssumptionError(GoodwinError, ValueError):
    """Parameters violate a standing assumption of the model."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainError(GoodwinError, ValueError):
    """A point lies outside ``D = (0, inf) x (0, 1)``."""


class RootCountError(GoodwinError, ValueError):
    """The rest-point equation has no root, or several, in ``(0, 1)``."""

    def __init__(self, message, roots):
        super().__init__(f"{message}: roots={list(map(float, roots))}")
        self.roots = list(roots)


class UndefinedRegionError(GoodwinError, ValueError):
    """Region membership requested at the stochastic rest point."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    gamma: float
    nu: float
    phi0: float
    phi1: float
    sigma0: float = 0.0
    beta: float | None = None
    a0: float | None = None
    N0: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{f.name} must be a finite number, got {v!r}")
        if self.nu <= 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if self.phi1 <= 0:
            raise ConfigError(f"phi1 must be positive, got {self.phi1}")
        if self.sigma0 < 0:
            raise ConfigError(f"sigma0 must be non-negative, got {self.sigma0}")
        for name in ("a0", "N0"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")

    _REQUIRED = ("alpha", "gamma", "nu", "phi0", "phi1", "sigma0")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("model parameters must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown parameter key(s): {', '.join(unknown)}")
        missing = [k for k in cls._REQUIRED if k not in data]
        if missing:
            raise ConfigError(f"missing parameter key(s): {', '.join(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return ModelParams(**d)


#: Example parameters with the Phillips intercept taken negative so that
#: ``Phi(0) < alpha`` holds.
PRESET = ModelParams(
    alpha=0.025, gamma=0.055, nu=3.0, phi0=-0.040064, phi1=0.000064,
    sigma0=0.1, beta=0.02, a0=1.0, N0=1.0,
)


# ---------------------------------------------------------------------------
# curves


def xm1_log1p(u, ratio=None):
    """``u - log1p(u)`` without cancellation; non-negative for ``u > -1``.

    ``ratio`` is ``1 + u`` computed directly (e.g. ``y / y_hat``); near
    ``u = -1`` its log is more accurate than ``log1p(u)``.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 0.05
    us = np.where(small, u, 0.0)
    series = np.zeros_like(us)
    p = us * us
    for k in range(2, 15):
        series += (1.0 if k % 2 == 0 else -1.0) * p / k
        p = p * us
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = u - np.log1p(u)
        if ratio is not None:
            ratio = np.asarray(ratio, dtype=float)
            direct = np.where(ratio < 0.5, u - np.log(ratio), direct)
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


class CurveSet:
    """Phillips curve ``phi``, investment function ``kappa`` and volatility ``sigma``.

    Inverses default to bracketed root finding on the monotone curves;
    subclasses may supply closed forms.  ``alpha`` and ``gamma`` are carried
    so that ``f(x) = phi_inv(alpha - gamma + kappa(x))`` can be formed.
    """

    def __init__(self, phi, phi_prime, kappa, kappa_prime, sigma, *, alpha, gamma,
                 sigma0=None, phi_inv=None, kappa_inv=None):
        self._phi = phi
        self._phi_prime = phi_prime
        self._kappa = kappa
        self._kappa_prime = kappa_prime
        self._sigma = sigma
        self._phi_inv = phi_inv
        self._kappa_inv = kappa_inv
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.sigma0 = sigma0

    def phi(self, y):
        return self._phi(y)

    def phi_prime(self, y):
        return self._phi_prime(y)

    def kappa(self, x):
        return self._kappa(x)

    def kappa_prime(self, x):
        return self._kappa_prime(x)

    def sigma(self, y):
        return self._sigma(y)

    def phi_diff(self, y, y_ref):
        """``phi(y) - phi(y_ref)``."""
        return self.phi(y) - self.phi(y_ref)

    def phi_inv(self, u):
        if self._phi_inv is not None:
            return self._phi_inv(u)
        u = np.asarray(u, dtype=float)
        if np.any(u <= self.phi(0.0)):
            raise InfeasibleParametersError("phi_inv argument must exceed phi(0)")
        g = lambda y: self.phi(y) - u  # noqa: E731
        hi = expand_upper(g, np.zeros_like(u), target_sign=1.0, limit=1.0)
        return bracketed_root(g, np.zeros_like(u), hi, fprime=self.phi_prime)

    def kappa_inv(self, v):
        if self._kappa_inv is not None:
            return self._kappa_inv(v)
        v = np.asarray(v, dtype=float)
        if np.any(v >= self.kappa(0.0)):
            raise InfeasibleParametersError("kappa_inv argument must be below kappa(0)")
        g = lambda x: self.kappa(x) - v  # noqa: E731
        hi = expand_upper(g, np.zeros_like(v), target_sign=-1.0, limit=math.inf)
        return bracketed_root(g, np.zeros_like(v), hi, fprime=self.kappa_prime)

    def f(self, x):
        """Employment level where the growth rate of ``y/x`` vanishes.

        Outside the range where ``alpha - gamma + kappa(x) > phi(0)`` the
        curve has left the domain through ``y = 0``; ``0`` is returned.
        """
        target = np.asarray(self.alpha - self.gamma + self.kappa(x), dtype=float)
        inside = target > self.phi(0.0)
        out = np.zeros_like(target)
        if np.any(inside):
            out[inside] = self.phi_inv(target[inside])
        return out if out.ndim else float(out)

    # Lyapunov pieces; generic versions integrate the defining integrals.

    def v1(self, x, x_hat):
        k_hat = float(self.kappa(x_hat))
        lx_hat = math.log(x_hat)

        def one(xv):
            val, _ = integrate.quad(lambda t: k_hat - self.kappa(math.exp(t)),
                                    lx_hat, math.log(xv), epsabs=1e-13, epsrel=1e-12, limit=200)
            return val

        return _vectorize(one, x)

    def v2(self, y, y_hat):
        p_hat = float(self.phi(y_hat))

        def one(yv):
            val, _ = integrate.quad(lambda s: (self.phi(s) - p_hat) / s,
                                    y_hat, yv, epsabs=1e-13, epsrel=1e-12, limit=200)
            return val

        return _vectorize(one, y)

    def v1_shift(self, x0, d, x_hat):
        """``V1(x0 exp(d)) - V1(x0)`` evaluated directly as a short integral."""
        k_hat = float(self.kappa(x_hat))
        l0 = math.log(x0)
        x_g, w_g = np.polynomial.legendre.leggauss(24)
        d = np.asarray(d, dtype=float)
        t = l0 + 0.5 * d[..., None] * (x_g + 1.0)
        vals = k_hat - self.kappa(np.exp(t))
        return 0.5 * d * np.sum(w_g * vals, axis=-1)


def _vectorize(fn, arr):
    a = np.asarray(arr, dtype=float)
    out = np.array([fn(v) for v in a.ravel()]).reshape(a.shape)
    return out if out.ndim else float(out)


class KeenSayCurves(CurveSet):
    """Closed-form preset: Say's law, Keen Phillips curve, ``sigma0 (1 - y)``."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.nu = params.nu
        self.phi0 = params.phi0
        self.phi1 = params.phi1
        super().__init__(None, None, None, None, None, alpha=params.alpha,
                         gamma=params.gamma, sigma0=params.sigma0)

    def phi(self, y):
        return self.phi1 / (1.0 - np.asarray(y, dtype=float)) ** 2 + self.phi0

    def phi_prime(self, y):
        return 2.0 * self.phi1 / (1.0 - np.asarray(y, dtype=float)) ** 3

    def phi_inv(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            y = 1.0 - np.sqrt(self.phi1 / (u - self.phi0))
        y = np.where(u > self.phi0, y, np.nan)
        return y if y.ndim else float(y)

    def phi_diff(self, y, y_ref):
        y = np.asarray(y, dtype=float)
        a = 1.0 - y_ref
        b = 1.0 - y
        d = y - y_ref
        return self.phi1 * d * (a + b) / (a * a * b * b)

    def kappa(self, x):
        return (1.0 - np.asarray(x, dtype=float)) / self.nu

    def kappa_prime(self, x):
        return np.full_like(np.asarray(x, dtype=float), -1.0 / self.nu)

    def kappa_inv(self, v):
        return 1.0 - self.nu * np.asarray(v, dtype=float)

    def sigma(self, y):
        return self.params.sigma0 * (1.0 - np.asarray(y, dtype=float))

    def v1(self, x, x_hat):
        x = np.asarray(x, dtype=float)
        return x_hat / self.nu * xm1_log1p(x / x_hat - 1.0, x / x_hat)

    def v2(self, y, y_hat):
        # integral of (phi(s)-phi(y_hat))/s split into three non-negative terms
        y = np.asarray(y, dtype=float)
        a = 1.0 - y_hat
        b = 1.0 - y
        d = y - y_hat
        out = self.phi1 * ((1.0 / (a * a) - 1.0) * xm1_log1p(d / y_hat, y / y_hat)
                           + xm1_log1p(-d / a) + d * d / (a * a * b))
        return out if np.ndim(out) else float(out)

    def v1_shift(self, x0, d, x_hat):
        d = np.asarray(d, dtype=float)
        return (x0 * np.expm1(d) - x_hat * d) / self.nu


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class Equilibria:
    x_hat: float
    y_hat: float
    x_tilde: float
    y_tilde: float

    @property
    def theta_tilde(self):
        return self.y_tilde / self.x_tilde

    @property
    def theta_hat(self):
        return self.y_hat / self.x_hat


class RegionId(enum.IntEnum):
    R1 = 1
    R2 = 2
    R3 = 3
    R4 = 4
    R5 = 5
    R6 = 6
    R7 = 7
    R8 = 8


class GoodwinModel:
    """Curves plus the constants ``alpha``, ``gamma``, ``sigma0``.

    Most functions in the package accept either a :class:`ModelParams`
    (interpreted with the :class:`KeenSayCurves` preset) or a model.
    """

    def __init__(self, curves: CurveSet, *, sigma0=0.0, params: ModelParams | None = None):
        self.curves = curves
        self.alpha = curves.alpha
        self.gamma = curves.gamma
        self.sigma0 = float(sigma0)
        self.params = params

    @classmethod
    def from_params(cls, params: ModelParams):
        return cls(KeenSayCurves(params), sigma0=params.sigma0, params=params)

    @property
    def is_preset(self):
        return isinstance(self.curves, KeenSayCurves)

    # equilibria -----------------------------------------------------------

    @cached_property
    def deterministic_point(self):
        c = self.curves
        if not c.phi(0.0) < self.alpha:
            raise InfeasibleParametersError(
                f"Phi(0) = {float(c.phi(0.0)):.6g} must be below alpha = {self.alpha:.6g}")
        if not c.kappa(0.0) > self.gamma:
            raise InfeasibleParametersError(
                f"kappa(0) = {float(c.kappa(0.0)):.6g} must exceed gamma = {self.gamma:.6g}")
        return float(c.kappa_inv(self.gamma)), float(c.phi_inv(self.alpha))

    def rest_point_residual(self, y):
        y = np.asarray(y, dtype=float)
        return self.curves.phi(y) - self.alpha + self.curves.sigma(y) ** 2

    def rest_point_roots(self, n_grid=4000):
        """All roots of ``Phi(y) - alpha + sigma(y)^2`` located by a grid scan."""
        grid = np.unique(np.concatenate([
            np.linspace(0.0, 1.0 - 1e-3, n_grid),
            1.0 - np.geomspace(1e-3, 1e-14, 400),
        ]))
        grid = grid[(grid >= 0.0) & (grid < 1.0)]
        h = self.rest_point_residual(grid)
        roots = []
        if h[0] == 0.0 and grid[0] > 0.0:
            roots.append(float(grid[0]))
        idx = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
        for i in idx:
            lo, hi = grid[i], grid[i + 1]
            r = bracketed_root(self.rest_point_residual, lo, hi,
                               fprime=lambda y: self._rest_point_slope(y))
            roots.append(float(r))
        roots.extend(float(g) for g in grid[1:-1][h[1:-1] == 0.0])
        return sorted(set(r for r in roots if 0.0 < r < 1.0))

    def _rest_point_slope(self, y, eps=1e-7):
        y = np.asarray(y, dtype=float)
        if self.is_preset:
            s0 = self.sigma0
            return self.curves.phi_prime(y) - 2.0 * s0 * s0 * (1.0 - y)
        return self.curves.phi_prime(y) + (self.curves.sigma(y + eps) ** 2
                                           - self.curves.sigma(y - eps) ** 2) / (2 * eps)

    @cached_property
    def rest_point(self):
        x_hat, y_hat = self.deterministic_point
        if self.sigma0 == 0.0:
            return x_hat, y_hat
        roots = self.rest_point_roots()
        if len(roots) != 1:
            raise RootCountError("rest-point equation must have exactly one root in (0,1)", roots)
        y_t = roots[0]
        s2 = float(self.curves.sigma(y_t)) ** 2
        return float(self.curves.kappa_inv(self.gamma - s2)), y_t

    @cached_property
    def equilibria(self):
        xh, yh = self.deterministic_point
        xt, yt = self.rest_point
        return Equilibria(xh, yh, xt, yt)

    # Lyapunov function ------------------------------------------------------

    def V1(self, x):
        return self.curves.v1(x, self.equilibria.x_hat)

    def V2(self, y):
        return self.curves.v2(y, self.equilibria.y_hat)

    def V(self, x, y):
        _check_domain(x, y)
        return self.V1(x) + self.V2(y)

    def generator(self, x, y):
        """Action of the diffusion generator on ``V``, after cancellation."""
        _check_domain(x, y)
        c = self.curves
        e = self.equilibria
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        kx = c.kappa(e.x_hat) - c.kappa(x) - x * c.kappa_prime(x)
        py = c.phi_diff(y, e.y_hat) + y * c.phi_prime(y)
        out = (kx + py) * c.sigma(y) ** 2 / 2.0
        return out if np.ndim(out) else float(out)

    def generator_expanded(self, x, y):
        """Generator applied to ``V`` term by term, before using ``alpha = Phi(y_hat)``."""
        _check_domain(x, y)
        c = self.curves
        e = self.equilibria
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s2 = c.sigma(y) ** 2
        kd = c.kappa(e.x_hat) - c.kappa(x)
        pd = c.phi(y) - c.phi(e.y_hat)
        vx = kd / x
        vy = pd / y
        vxx = (-c.kappa_prime(x) * x - kd) / x ** 2
        vyy = (c.phi_prime(y) * y - pd) / y ** 2
        out = (vx * x * (c.phi(y) - self.alpha + s2)
               + vy * y * (c.kappa(x) - self.gamma + s2)
               + 0.5 * s2 * (vxx * x * x + vyy * y * y))
        return out if np.ndim(out) else float(out)

    def band_objectives(self, x, y):
        """Integrands of the exit-time constants: drift-like and squared diffusion of ``V``."""
        c = self.curves
        e = self.equilibria
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s2 = c.sigma(y) ** 2
        kd = c.kappa(e.x_hat) - c.kappa(x)
        pd = c.phi_diff(y, e.y_hat)
        r_obj = s2 * (kd - x * c.kappa_prime(x) + y * c.phi_prime(y) + pd)
        i_obj = s2 * (kd + pd) ** 2
        return r_obj, i_obj

    # regions --------------------------------------------------------------

    def region_mask(self, x, y):
        """Bitmask of closed-region membership; bit ``i-1`` stands for ``R_i``."""
        _check_domain(x, y)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        e = self.equilibria
        c = self.curves
        if np.any((x == e.x_tilde) & (y == e.y_tilde)):
            raise UndefinedRegionError("regions are undefined at the rest point")
        th = e.theta_tilde
        # y >= f(x) <=> Phi(y) >= alpha - gamma + kappa(x); no inverse needed
        lhs = c.phi(y)
        rhs = self.alpha - self.gamma + c.kappa(x)
        up, down = y >= e.y_tilde, y <= e.y_tilde
        above_f, below_f = lhs >= rhs, lhs <= rhs
        right, left = x >= e.x_tilde, x <= e.x_tilde
        under_line, over_line = y <= th * x, y >= th * x
        preds = [
            up & under_line,        # R1
            above_f & down,         # R2
            below_f & right,        # R3
            left & under_line,      # R4
            down & over_line,       # R5
            up & below_f,           # R6
            above_f & left,         # R7
            right & over_line,      # R8
        ]
        mask = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
        for i, p in enumerate(preds):
            mask |= p.astype(np.int64) << i
        return mask if mask.ndim else int(mask)

    def theta_drift(self, x, y):
        """Growth rate of ``y/x``: ``Phi(f(x)) - Phi(y)``."""
        return self.alpha - self.gamma + self.curves.kappa(x) - self.curves.phi(y)


def _check_domain(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(x > 0) and np.all(y > 0) and np.all(y < 1)):
        raise DomainError("points must lie in D = (0, inf) x (0, 1)")


def as_model(obj) -> GoodwinModel:
    if isinstance(obj, GoodwinModel):
        return obj
    if isinstance(obj, ModelParams):
        return GoodwinModel.from_params(obj)
    raise TypeError(f"expected ModelParams or GoodwinModel, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {c.name: {"passed": c.passed, "margin": c.margin, "detail": c.detail}
                for c in self.checks}


def growth_constants(params: ModelParams):
    """Constants ``(K, k)`` of the closed-form growth bounds for the preset.

    Returns ``(K_y, k_y, K_x, k_x)`` with
    ``sigma(y)^2 Phi'(y) <= K_y V2(y) + k_y`` and
    ``-x kappa'(x) - kappa(x) <= K_x V1(x) + k_x``.
    """
    x_hat = 1.0 - params.nu * params.gamma
    y_hat = 1.0 - math.sqrt(params.phi1 / (params.alpha - params.phi0))
    a = 1.0 - y_hat
    s2 = params.sigma0 ** 2
    # V2(y) >= phi1/(1-y) - c_y, from dropping the non-negative log terms
    c_y = params.phi1 * (1.0 / a - math.log(a) + y_hat * (2.0 - y_hat) / a ** 2 * math.log(1.0 / y_hat))
    K_y = 2.0 * s2
    k_y = 2.0 * s2 * c_y
    K_x = 2.0 / (1.0 - x_hat)
    k_x = K_x * (x_hat - x_hat * math.log(x_hat))
    return K_y, k_y, K_x, k_x


def validate_assumptions(params: ModelParams) -> AssumptionReport:
    """Check the curve, growth and uniqueness assumptions for the preset.

    Failures are report entries, never exceptions.
    """
    c = KeenSayCurves(params)
    checks = []
    phi0 = float(c.phi(0.0))
    checks.append(AssumptionCheck("A1(i) Phi(0) < alpha", bool(phi0 < params.alpha),
                                  params.alpha - phi0, f"Phi(0)={phi0:.6g}"))
    k0 = float(c.kappa(0.0))
    checks.append(AssumptionCheck("A1(ii) kappa(0) > gamma", bool(k0 > params.gamma),
                                  k0 - params.gamma, f"kappa(0)={k0:.6g}"))
    grid = np.linspace(0.0, 1.0 - 1e-6, 2001)
    slope = np.min(c.phi_prime(grid))
    checks.append(AssumptionCheck("A1(i) Phi increasing and convex", bool(slope > 0), float(slope)))

    feasible = phi0 < params.alpha and k0 > params.gamma
    if feasible and params.nu * params.gamma < 1.0:
        K_y, k_y, K_x, k_x = growth_constants(params)
        x_hat = 1.0 - params.nu * params.gamma
        y_hat = float(c.phi_inv(params.alpha))
        ys = np.concatenate([np.linspace(1e-6, 1 - 1e-3, 4000), 1 - np.geomspace(1e-3, 1e-9, 400)])
        lhs_y = c.sigma(ys) ** 2 * c.phi_prime(ys)
        m_y = float(np.min(K_y * c.v2(ys, y_hat) + k_y - lhs_y))
        checks.append(AssumptionCheck("A4(i) sigma^2 Phi' <= K V2 + k", bool(m_y >= -1e-12), m_y,
                                      f"K={K_y:.6g}, k={k_y:.6g}"))
        xs = np.geomspace(1e-6, 1e3, 4000)
        lhs_x = -xs * c.kappa_prime(xs) - c.kappa(xs)
        m_x = float(np.min(K_x * c.v1(xs, x_hat) + k_x - lhs_x))
        checks.append(AssumptionCheck("A4(ii) -x kappa' - kappa <= K V1 + k", bool(m_x >= -1e-12), m_x,
                                      f"K={K_x:.6g}, k={k_x:.6g}"))
    else:
        checks.append(AssumptionCheck("A4(i) sigma^2 Phi' <= K V2 + k", False, math.nan,
                                      "equilibrium infeasible"))
        checks.append(AssumptionCheck("A4(ii) -x kappa' - kappa <= K V1 + k", False, math.nan,
                                      "equilibrium infeasible"))

    # uniqueness of the rest point: sufficient condition with alpha - phi0,
    # the coefficient obtained by substituting sigma into Phi - alpha + sigma^2
    s = params.alpha - params.phi0
    if params.sigma0 == 0.0:
        checks.append(AssumptionCheck("A8 unique rest point", True, math.inf, "sigma0 = 0"))
    else:
        m1 = s / 2.0 - params.phi1
        bound = max(s / (2.0 * math.sqrt(params.phi1)), s - params.phi1)
        m2 = bound - params.sigma0
        checks.append(AssumptionCheck("A8 unique rest point", m1 >= 0 and m2 >= 0, min(m1, m2),
                                      f"phi1 <= {s / 2:.6g}, sigma0 <= {bound:.6g}"))
    return AssumptionReport(tuple(checks))


def require_assumptions(params):
    """Raise :class:`AssumptionError` unless every assumption check passes."""
    report = validate_assumptions(params)
    if not report.ok:
        names = ", ".join(c.name for c in report.failures())
        raise AssumptionError(f"assumption check failed: {names}", report)
    return report


def deterministic_equilibrium(params):
    """``(x_hat, y_hat) = (kappa^-1(gamma), Phi^-1(alpha))``."""
    return as_model(params).deterministic_point


def stochastic_rest_point(params):
    """Unique zero ``(x_tilde, y_tilde)`` of the drift of the perturbed system."""
    return as_model(params).rest_point


def lyapunov(x, y, params):
    return as_model(params).V(x, y)


def lyapunov_generator(x, y, params):
    return as_model(params).generator(x, y)


def classify_region(x, y, params):
    """Set of regions ``R1..R8`` containing the point ``(x, y)``."""
    mask = as_model(params).region_mask(float(x), float(y))
    return frozenset(RegionId(i + 1) for i in range(8) if mask >> i & 1)
