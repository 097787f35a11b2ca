"""Closed orbits of the deterministic system and their periods.

``orbit_period`` evaluates the period of the orbit ``V = v0`` as the
integral over ``z = log x`` of ``1/u_plus - 1/u_minus``, where
``u = Phi(y) - alpha`` is recovered on each half of the orbit from the
level equation ``V2(y) = v0 - V1(exp z)``.  ``period_by_return`` is an
independent check that integrates the flow and times the return to a ray
through the equilibrium.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .model import GoodwinError, GoodwinModel, _check_domain, as_model
from .quadrature import tanh_sinh
from .roots import bracketed_root, expand_upper


class StepLeavesDomainError(GoodwinError, ArithmeticError):
    """Step halving budget exhausted near the boundary of ``D``."""


class NoReturnError(GoodwinError, ArithmeticError):
    """The trajectory did not come back to its starting ray in time."""


# below this level value the branch inverses use the quadratic expansion
_SMALL_LEVEL = 1e-18


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    V: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    @property
    def states(self):
        return np.column_stack([self.x, self.y])

    def to_csv(self, path):
        from .io import fmt

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            header = ["t", "x", "y"] + (["V"] if self.V is not None else [])
            wr.writerow(header)
            for i in range(len(self.times)):
                row = [self.times[i], self.x[i], self.y[i]]
                if self.V is not None:
                    row.append(self.V[i])
                wr.writerow([fmt(v) for v in row])


@dataclass(frozen=True)
class PeriodResult:
    v0: float
    t_formula: float
    x_under: float
    x_bar: float
    y_under: float
    y_bar: float
    t_return: float | None = None
    quad_error: float = 0.0

    def csv_row(self):
        return [self.v0, self.t_formula,
                math.nan if self.t_return is None else self.t_return,
                self.x_under, self.x_bar]


def param_vector(model: GoodwinModel, *, center=None, direction=1.0, sigma0=None):
    """Pack the preset constants for the compiled kernels."""
    if not model.is_preset:
        raise NotImplementedError("compiled simulation is only available for the preset curves")
    prm = model.params
    e = model.equilibria
    if center is None:
        center = (e.x_tilde, e.y_tilde)
    p = np.empty(K.N_PAR)
    p[K.P_ALPHA] = prm.alpha
    p[K.P_GAMMA] = prm.gamma
    p[K.P_NU] = prm.nu
    p[K.P_PHI0] = prm.phi0
    p[K.P_PHI1] = prm.phi1
    p[K.P_SIG0] = model.sigma0 if sigma0 is None else sigma0
    p[K.P_XHAT] = e.x_hat
    p[K.P_YHAT] = e.y_hat
    p[K.P_XC] = center[0]
    p[K.P_YC] = center[1]
    p[K.P_DIR] = direction
    return p


def integrate_ode(start, t_end, params, dt=1e-3, *, record_stride=1, reverse=False,
                  max_halvings=40):
    """Integrate the deterministic system from ``start`` over ``[0, t_end]``.

    Classical RK4 with base step ``dt`` in log coordinates.  A step is
    halved (up to ``max_halvings`` times) when it would leave ``D`` or
    when ``dt`` is too coarse for the local time scale near ``y = 1``.
    ``reverse`` integrates the time-reversed flow.
    """
    model = as_model(params)
    x0, y0 = map(float, start)
    _check_domain(x0, y0)
    if dt <= 0 or t_end < 0:
        raise ValueError("dt must be positive and t_end non-negative")
    n_steps = int(round(t_end / dt))
    e = model.equilibria
    p = param_vector(model, center=(e.x_hat, e.y_hat),
                     direction=-1.0 if reverse else 1.0, sigma0=0.0)
    n_rec = n_steps // record_stride + 1
    rec = np.empty((n_rec, 7))
    ev = np.empty(K.N_EV)
    n = K.run_path(p, math.log(x0), math.log(y0), dt, n_steps, 0, 0, 0, max_halvings, 0,
                   0.0, 0.0, 0.0, record_stride, rec, ev)
    if ev[K.E_STATUS] != K.STATUS_OK:
        raise StepLeavesDomainError(
            f"step halving budget exhausted at t={ev[K.E_T_END]:.6g}; reduce dt")
    rec = rec[:n]
    x = np.exp(rec[:, 1])
    y = np.exp(rec[:, 2])
    return Trajectory(rec[:, 0].copy(), x, y, model.V(x, y))


# ---------------------------------------------------------------------------
# level sets


def _level_root(fn, dfn, ref, v, toward):
    """Point on the branch from ``ref`` toward ``toward`` where ``fn = v``."""
    v = np.asarray(v, dtype=float)
    g = lambda s: fn(s) - v  # noqa: E731
    ref_arr = np.full(v.shape, ref)
    if math.isinf(toward):
        far = expand_upper(g, ref_arr, target_sign=1.0, limit=math.inf)
    else:
        far = expand_upper(lambda s: fn(s) - v, ref_arr, target_sign=1.0, limit=toward)
    return bracketed_root(g, ref_arr, far, fprime=dfn)


def level_extent(v0, params):
    """``(x_under, x_bar, y_under, y_bar)`` of the orbit ``V = v0``."""
    model = as_model(params)
    v0 = np.asarray(v0, dtype=float)
    if np.any(v0 <= 0):
        raise ValueError("level must be positive")
    e = model.equilibria
    c = model.curves
    dv1 = lambda x: (c.kappa(e.x_hat) - c.kappa(x)) / x  # noqa: E731
    dv2 = lambda y: c.phi_diff(y, e.y_hat) / y  # noqa: E731
    x_under = _level_root(model.V1, dv1, e.x_hat, v0, 0.0)
    x_bar = _level_root(model.V1, dv1, e.x_hat, v0, math.inf)
    y_under = _level_root(model.V2, dv2, e.y_hat, v0, 0.0)
    y_bar = _level_root(model.V2, dv2, e.y_hat, v0, 1.0)
    return x_under, x_bar, y_under, y_bar


def _growth_branches(model: GoodwinModel, level):
    """``(u_plus, u_minus)``: values of ``Phi(y) - alpha`` with ``V2(y) = level`` above/below ``y_hat``."""
    e = model.equilibria
    c = model.curves
    level = np.asarray(level, dtype=float)
    small = level < _SMALL_LEVEL
    u_plus = np.empty_like(level)
    u_minus = np.empty_like(level)
    curv = 2.0 * e.y_hat * float(c.phi_prime(e.y_hat))
    lead = np.sqrt(curv * np.maximum(level[small], 0.0))
    u_plus[small] = lead
    u_minus[small] = -lead
    big = ~small
    if np.any(big):
        dv2 = lambda y: c.phi_diff(y, e.y_hat) / y  # noqa: E731
        yp = _level_root(model.V2, dv2, e.y_hat, level[big], 1.0)
        ym = _level_root(model.V2, dv2, e.y_hat, level[big], 0.0)
        u_plus[big] = c.phi_diff(yp, e.y_hat)
        u_minus[big] = c.phi_diff(ym, e.y_hat)
    return u_plus, u_minus


def orbit_period(v0, params, *, tol=1e-9):
    """Period of the closed orbit ``V = v0`` by the level-set integral."""
    model = as_model(params)
    v0 = float(v0)
    if v0 <= 0:
        raise ValueError("level must be positive")
    e = model.equilibria
    c = model.curves
    xu, xb, yu, yb = (float(t) for t in level_extent(v0, model))
    zu, zb = math.log(xu), math.log(xb)

    def integrand(z, dl, dr):
        left = dl <= dr
        g = np.where(left, -c.v1_shift(xu, dl, e.x_hat), -c.v1_shift(xb, -dr, e.x_hat))
        g = np.clip(g, 0.0, v0)
        up, um = _growth_branches(model, g)
        with np.errstate(divide="ignore"):
            return 1.0 / up - 1.0 / um

    res = tanh_sinh(integrand, zu, zb, tol=tol, endpoint_distances=True)
    return PeriodResult(v0=v0, t_formula=res.value, x_under=xu, x_bar=xb,
                        y_under=yu, y_bar=yb, quad_error=res.error)


def linearized_period(params):
    """Small-amplitude limit ``2 pi / sqrt(-x_hat Phi'(y_hat) y_hat kappa'(x_hat))``."""
    model = as_model(params)
    e = model.equilibria
    c = model.curves
    prod = -e.x_hat * float(c.phi_prime(e.y_hat)) * e.y_hat * float(c.kappa_prime(e.x_hat))
    if not prod > 0:
        raise ValueError("linearisation is not a centre")
    return 2.0 * math.pi / math.sqrt(prod)


def ray_return_time(times, x, y, center, start):
    """First time the sampled path re-crosses the ray ``center -> start`` in the starting direction."""
    ux, uy = start[0] - center[0], start[1] - center[1]
    vx = x - center[0]
    vy = y - center[1]
    s = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    if len(s) < 3:
        return None
    side = np.sign(s[1])
    if side == 0:
        side = np.sign(s[2])
    prev = s[1:-1] * side
    nxt = s[2:] * side
    cand = np.nonzero((prev < 0) & (nxt >= 0))[0] + 1
    if cand.size == 0:
        return None
    # the side test uses the interpolated crossing, since one step near y = 1
    # can carry the sample past the centre
    frac = s[cand] / (s[cand] - s[cand + 1])
    dot_c = dot[cand] + frac * (dot[cand + 1] - dot[cand])
    hit = cand[dot_c > 0]
    if hit.size == 0:
        return None
    i = hit[0]
    frac = s[i] / (s[i] - s[i + 1])
    return float(times[i] + frac * (times[i + 1] - times[i]))


def period_by_return(start, params, dt=1e-3, *, t_max=None):
    """Period of the orbit through ``start`` measured by returning to the start ray."""
    model = as_model(params)
    e = model.equilibria
    start = tuple(map(float, start))
    if start == (e.x_hat, e.y_hat):
        raise ValueError("start must differ from the equilibrium")
    if t_max is None:
        t_max = 10.0 * linearized_period(model)
    traj = integrate_ode(start, t_max, model, dt)
    t = ray_return_time(traj.times, traj.x, traj.y, (e.x_hat, e.y_hat), start)
    if t is None:
        raise NoReturnError(f"no return to the start ray within t_max={t_max:.6g}")
    return t
