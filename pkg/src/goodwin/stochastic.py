"""Simulation of the perturbed system and the quantities read off its paths.

Paths are advanced in ``(log x, log y)`` by the compiled kernel: RK4 for
the drift (with its Ito correction) and an Euler update for the common
noise ``sigma(y) dW``.  A proposal that would leave ``y < 1`` is rejected
and the step split in two halves whose increments follow the Brownian
bridge, so the driving noise keeps its law.

``theta = y/x`` carries no noise: both coordinates receive the same
``sigma(y) dW`` in log form, and the Ito terms cancel as well.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import _kernels as K
from .deterministic import StepLeavesDomainError, _level_root, level_extent, param_vector
from .model import (ConfigError, GoodwinError, GoodwinModel,
                    _check_domain, as_model, require_assumptions)

UINT64_MAX = 2 ** 64 - 1


class DomainEscapeError(StepLeavesDomainError):
    """Reject-and-halve budget exhausted; ``sigma0 * dt`` is too coarse."""


class CenterHitError(GoodwinError, ValueError):
    """A point coincides with the winding centre."""


class MissingIncrementsError(GoodwinError, ValueError):
    """The path does not carry its Brownian increments."""


class MissingEconomicParametersError(ConfigError):
    """``beta``, ``a0`` or ``N0`` is not set."""


class DegenerateBoundError(GoodwinError, ArithmeticError):
    """``R = 0``: the exit-time bound is undefined (the band is never left)."""


@dataclass(frozen=True)
class SdeConfig:
    dt: float = 1e-3
    seed: int = 0
    max_halvings: int = 40
    t_max: float = 100.0
    record_stride: int = 1
    level: int = 0
    line_slope: str | float = "tilde"

    def __post_init__(self):
        if not (isinstance(self.dt, (int, float)) and self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (isinstance(self.t_max, (int, float)) and self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError(f"t_max must be positive, got {self.t_max!r}")
        for name, lo in (("max_halvings", 1), ("record_stride", 1), ("level", 0)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= UINT64_MAX:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.max_halvings > 60:
            raise ConfigError("max_halvings above 60 exceeds the bridge node range")
        ls = self.line_slope
        if isinstance(ls, str):
            if ls not in ("tilde", "hat"):
                raise ConfigError(f"line_slope must be 'tilde', 'hat' or a positive number, got {ls!r}")
        elif isinstance(ls, bool) or not isinstance(ls, (int, float)) or not ls > 0:
            raise ConfigError(f"line_slope must be 'tilde', 'hat' or a positive number, got {ls!r}")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("sde section must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown sde keys: {unknown}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return SdeConfig(**d)

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt))


def _kernel_seed(seed):
    # the kernels take int64; the hash reinterprets it as uint64
    return seed - 2 ** 64 if seed >= 2 ** 63 else seed


def line_log_slope(config: SdeConfig, model: GoodwinModel):
    e = model.equilibria
    if config.line_slope == "tilde":
        return math.log(e.theta_tilde)
    if config.line_slope == "hat":
        return math.log(e.theta_hat)
    return math.log(float(config.line_slope))


@dataclass(frozen=True)
class LoopEvents:
    """Completion of one stochastic orbit, by winding angle and by line crossing."""

    t_end: float
    s_winding: float
    y_winding: float
    completed_winding: bool
    s_line: float
    y_line: float
    x_line: float
    completed_line: bool

    @classmethod
    def from_record(cls, ev):
        wd = bool(ev[K.E_WIND_DONE])
        ld = bool(ev[K.E_LINE_DONE])
        t_end = float(ev[K.E_T_END])
        return cls(
            t_end=t_end,
            s_winding=float(ev[K.E_WIND_T]) if wd else t_end,
            y_winding=float(ev[K.E_WIND_Y]),
            completed_winding=wd,
            s_line=float(ev[K.E_LINE_T]) if ld else t_end,
            y_line=float(ev[K.E_LINE_Y]),
            x_line=float(ev[K.E_LINE_X]),
            completed_line=ld,
        )

    @property
    def completed(self):
        return self.completed_winding and self.completed_line


@dataclass(frozen=True)
class StochasticPath:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    sigma_dW: np.ndarray | None
    sigma2_dt: np.ndarray | None
    dW: np.ndarray | None
    events: LoopEvents
    center: tuple
    seed: int = 0
    path_index: int = 0
    substeps: int = 0
    max_depth: int = 0
    # exact states and stepping settings, enough to replay any interval
    log_x: np.ndarray | None = None
    log_y: np.ndarray | None = None
    dt: float = math.nan
    record_stride: int = 1
    level: int = 0
    max_halvings: int = 40
    sigma0: float = math.nan

    def __len__(self):
        return len(self.times)

    def region_masks(self, params):
        return as_model(params).region_mask(self.x, self.y)

    def to_csv(self, fh_or_path, params):
        from .io import fmt

        model = as_model(params)
        masks = np.atleast_1d(model.region_mask(self.x, self.y))
        try:
            a, _, P = economic_series(self, model)
        except MissingEconomicParametersError:
            a = P = np.full(len(self.times), np.nan)

        def write(fh):
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "x", "y", "rho", "region", "a", "P"])
            for i in range(len(self.times)):
                wr.writerow([fmt(self.times[i]), fmt(self.x[i]), fmt(self.y[i]), fmt(self.rho[i]),
                             region_label(int(masks[i])), fmt(a[i]), fmt(P[i])])

        if hasattr(fh_or_path, "write"):
            write(fh_or_path)
        else:
            with open(fh_or_path, "w", newline="") as fh:
                write(fh)


def region_label(mask):
    """``'R2'`` for a single region, ``'R2|R3'`` on a shared boundary."""
    return "|".join(f"R{i + 1}" for i in range(8) if mask >> i & 1)


def simulate_sde(start, config: SdeConfig, params, *, path_index=0, stop_on_loop=False):
    """Simulate one path of the perturbed system from ``start``.

    With ``stop_on_loop`` the run ends at the first recorded step after
    both loop detectors have fired; otherwise it runs to ``config.t_max``.
    """
    model = as_model(params)
    require_assumptions(model.params)
    x0, y0 = map(float, start)
    _check_domain(x0, y0)
    e = model.equilibria
    p = param_vector(model)
    n_steps = config.n_steps
    stride = config.record_stride
    rec = np.empty((n_steps // stride + 1, 7))
    ev = np.empty(K.N_EV)
    mask = (K.STOP_WIND | K.STOP_LINE) if stop_on_loop else 0
    n = K.run_path(p, math.log(x0), math.log(y0), config.dt, n_steps, _kernel_seed(config.seed),
                   path_index, config.level, config.max_halvings, mask, 0.0, 0.0,
                   line_log_slope(config, model), stride, rec, ev)
    if ev[K.E_STATUS] != K.STATUS_OK:
        raise DomainEscapeError(
            f"reject-and-halve budget of {config.max_halvings} exhausted at t={ev[K.E_T_END]:.6g}; "
            "reduce dt")
    rec = rec[:n]
    noisy = model.sigma0 > 0
    return StochasticPath(
        times=rec[:, 0].copy(),
        x=np.exp(rec[:, 1]),
        y=np.exp(rec[:, 2]),
        rho=rec[:, 3].copy(),
        sigma_dW=rec[:, 4].copy(),
        sigma2_dt=rec[:, 5].copy(),
        dW=rec[:, 6].copy() if noisy else np.zeros(n),
        events=LoopEvents.from_record(ev),
        center=(e.x_tilde, e.y_tilde),
        seed=config.seed,
        path_index=path_index,
        substeps=int(ev[K.E_SUBSTEPS]),
        max_depth=int(ev[K.E_MAX_DEPTH]),
        log_x=rec[:, 1].copy(),
        log_y=rec[:, 2].copy(),
        dt=config.dt,
        record_stride=stride,
        level=config.level,
        max_halvings=config.max_halvings,
        sigma0=model.sigma0,
    )


def update_winding(prev, nxt, center, rho_prev):
    """Add the signed angle from ``prev`` to ``nxt`` seen from ``center`` to ``rho_prev``."""
    ux, uy = prev[0] - center[0], prev[1] - center[1]
    vx, vy = nxt[0] - center[0], nxt[1] - center[1]
    if (ux == 0 and uy == 0) or (vx == 0 and vy == 0):
        raise CenterHitError("winding angle is undefined at the centre")
    return rho_prev + math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)


def stochastic_period(path_or_start, config: SdeConfig | None = None, params=None, *, path_index=0):
    """Loop events of a path: first ``|rho| >= 2 pi`` and second crossing of the reference line.

    Accepts a simulated :class:`StochasticPath` or a start point (simulated
    with ``config`` and ``params`` until both detectors fire or ``t_max``).
    An unfinished loop is reported with ``completed_* = False`` and the
    horizon in place of the time.
    """
    if isinstance(path_or_start, StochasticPath):
        return path_or_start.events
    if config is None or params is None:
        raise TypeError("a start point needs a config and params")
    model = as_model(params)
    e = model.equilibria
    start = tuple(map(float, path_or_start))
    if start == (e.x_tilde, e.y_tilde):
        raise CenterHitError("start coincides with the rest point")
    cfg = config.replace(record_stride=max(config.n_steps, 1))
    return simulate_sde(start, cfg, model, path_index=path_index, stop_on_loop=True).events


def economic_series(path: StochasticPath, params):
    """Productivity ``a``, labour force ``N`` and output ``P = a y N`` along ``path``.

    ``log a`` is driven by the same increments as the state, with the
    opposite sign: ``d log a = (alpha - sigma^2/2) dt - sigma dW``.
    """
    if path.sigma_dW is None or path.sigma2_dt is None:
        raise MissingIncrementsError("path carries no Brownian increments")
    model = as_model(params)
    prm = model.params
    missing = [k for k in ("beta", "a0", "N0") if getattr(prm, k) is None]
    if missing:
        raise MissingEconomicParametersError(f"economic series need {missing}")
    t = path.times
    a = prm.a0 * np.exp(prm.alpha * t - 0.5 * path.sigma2_dt - path.sigma_dW)
    N = prm.N0 * np.exp(prm.beta * t)
    return a, N, a * path.y * N


# ---------------------------------------------------------------------------
# exit-time constants


@dataclass(frozen=True)
class BandConstants:
    """Maxima of the exit-time objectives over ``{|V - v0| <= rho}``."""

    r_const: float
    i_const: float
    r_signed: float
    r_point: tuple
    i_point: tuple

    def __iter__(self):
        return iter((self.r_const, self.i_const))


def _band_points(model: GoodwinModel, v, t):
    """Points of the level curves ``V = v`` at curve parameter ``t`` in ``[0, 2)``.

    ``t`` in ``[0, 1)`` runs along the upper branch from ``x_under`` to
    ``x_bar``; ``[1, 2)`` returns along the lower branch.
    """
    e = model.equilibria
    c = model.curves
    v, t = np.broadcast_arrays(np.asarray(v, float), np.mod(np.asarray(t, float), 2.0))
    v = v.ravel()
    t = t.ravel()
    xu, xb, _, _ = level_extent(v, model)
    tau = np.where(t < 1.0, t, 2.0 - t)
    x = xu + (xb - xu) * 0.5 * (1.0 - np.cos(np.pi * tau))
    g = np.clip(v - model.V1(x), 0.0, None)
    y = np.full_like(x, e.y_hat)
    dv2 = lambda s: c.phi_diff(s, e.y_hat) / s  # noqa: E731
    pos = g > 0
    up = pos & (t < 1.0)
    lo = pos & (t >= 1.0)
    if np.any(up):
        y[up] = _level_root(model.V2, dv2, e.y_hat, g[up], 1.0)
    if np.any(lo):
        y[lo] = _level_root(model.V2, dv2, e.y_hat, g[lo], 0.0)
    return x, y


def estimate_constants(v0, rho, params, *, n_levels=17, n_curve=512, refine=8):
    """``R`` and ``I`` over the band ``|V - v0| <= rho``, with the maximising points.

    A grid over (level, curve parameter) is followed by ``refine`` rounds of
    local zooming around the best sample of each objective.  ``r_const`` is
    the largest ``|r|`` so that it bounds the drift of ``V`` both ways;
    ``r_signed`` keeps the plain maximum.
    """
    model = as_model(params)
    v0 = float(v0)
    rho = float(rho)
    if not (0.0 <= rho <= v0):
        raise ValueError("need 0 <= rho <= v0")
    v_lo = max(v0 - rho, 1e-12 * v0)
    v_hi = v0 + rho
    vs = np.linspace(v_lo, v_hi, n_levels if rho > 0 else 1)
    ts = np.arange(n_curve) * (2.0 / n_curve)
    V, T = np.meshgrid(vs, ts, indexing="ij")
    V = V.ravel()
    T = T.ravel()
    x, y = _band_points(model, V, T)
    r, i = model.band_objectives(x, y)

    def zoom(score, k):
        best_v, best_t, best = V[k], T[k], score[k]
        dv = (v_hi - v_lo) / max(len(vs) - 1, 1)
        dt = 2.0 / n_curve
        for _ in range(refine):
            gv = np.clip(best_v + dv * np.linspace(-1, 1, 9), v_lo, v_hi) if rho > 0 else np.array([v0])
            gt = best_t + dt * np.linspace(-1, 1, 9)
            GV, GT = np.meshgrid(gv, gt, indexing="ij")
            px, py = _band_points(model, GV.ravel(), GT.ravel())
            s = score_fn(px, py)
            j = int(np.argmax(s))
            if s[j] > best:
                best, best_v, best_t = s[j], GV.ravel()[j], GT.ravel()[j]
            dv *= 0.25
            dt *= 0.25
        px, py = _band_points(model, best_v, best_t)
        return float(best), (float(px[0]), float(py[0]))

    score_fn = lambda px, py: model.band_objectives(px, py)[0]  # noqa: E731
    r_max, r_pt = zoom(r, int(np.argmax(r)))
    score_fn = lambda px, py: -model.band_objectives(px, py)[0]  # noqa: E731
    r_negmax, r_npt = zoom(-r, int(np.argmax(-r)))
    score_fn = lambda px, py: model.band_objectives(px, py)[1]  # noqa: E731
    i_max, i_pt = zoom(i, int(np.argmax(i)))
    r_abs, r_abs_pt = (r_max, r_pt) if r_max >= r_negmax else (r_negmax, r_npt)
    return BandConstants(r_const=max(r_abs, 0.0), i_const=max(i_max, 0.0), r_signed=r_max,
                         r_point=r_abs_pt, i_point=i_pt)


def analytic_envelope(params):
    """``(K, k)`` with ``r(x, y) <= K V(x, y) + k`` for the preset curves."""
    prm = params.params if isinstance(params, GoodwinModel) else params
    x_hat = 1.0 - prm.nu * prm.gamma
    y_hat = 1.0 - math.sqrt(prm.phi1 / (prm.alpha - prm.phi0))
    a = 1.0 - y_hat
    s2 = prm.sigma0 ** 2
    c_y = prm.phi1 * (1.0 / a - math.log(a) + y_hat * (2.0 - y_hat) / a ** 2 * math.log(1.0 / y_hat))
    K_env = 2.0 * s2 / (1.0 - x_hat)
    k_env = s2 * (2.0 / (1.0 - x_hat) * (x_hat - x_hat * math.log(x_hat))
                  + (1.0 - x_hat) / prm.nu + prm.phi1 + 2.0 * c_y)
    return K_env, k_env


@dataclass(frozen=True)
class ExitBound:
    v0: float
    rho: float
    r_const: float
    i_const: float
    mu: float
    theta: float
    p_lower: float
    p_lower_raw: float
    variant: str = "derived"
    r_signed: float = math.nan

    @property
    def vacuous(self):
        return self.p_lower_raw <= 0.0

    def to_dict(self):
        return asdict(self)


def exit_time_horizon(rho, mu, r_const, *, variant="derived", sigma0=None):
    """Horizon ``Theta`` over which the band survives with the stated probability.

    ``derived``: the largest ``t`` with ``R t / 2 + mu sqrt(t) <= rho``.
    ``printed``: ``2 (mu^2 + mu sqrt(mu^2 + 2 rho R) + rho R) / (R sigma0)^2``.
    """
    if r_const <= 0.0:
        raise DegenerateBoundError("R = 0: the band is never left, Theta is undefined")
    root = math.sqrt(mu * mu + 2.0 * rho * r_const)
    if variant == "derived":
        # (root - mu)/R written without cancellation
        s = 2.0 * rho / (root + mu)
        return s * s
    if variant == "printed":
        if not sigma0:
            raise DegenerateBoundError("printed variant needs sigma0 > 0")
        return 2.0 * (mu * mu + mu * root + rho * r_const) / (r_const * sigma0) ** 2
    raise ValueError(f"unknown variant {variant!r}")


def mu_for_probability(p_lower, i_const):
    """``mu`` with ``1 - I/mu^2 = p_lower``."""
    if not 0.0 <= p_lower < 1.0:
        raise ValueError("p_lower must lie in [0, 1)")
    return math.sqrt(i_const / (1.0 - p_lower))


def exit_bound(v0, rho, mu, params, *, variant="derived", constants: BandConstants | None = None):
    """Lower bound on ``P(tau_rho > Theta)`` for paths started on ``V = v0``."""
    model = as_model(params)
    if not mu > 0:
        raise ValueError("mu must be positive")
    if constants is None:
        constants = estimate_constants(v0, rho, model)
    r, i = constants
    theta = exit_time_horizon(rho, mu, r, variant=variant, sigma0=model.sigma0)
    raw = 1.0 - i / (mu * mu)
    return ExitBound(v0=float(v0), rho=float(rho), r_const=r, i_const=i, mu=float(mu),
                     theta=theta, p_lower=min(max(raw, 0.0), 1.0), p_lower_raw=raw,
                     variant=variant, r_signed=constants.r_signed)


# ---------------------------------------------------------------------------
# region audit


_ADJACENT = np.zeros((256, 256), dtype=bool)
for _a in range(1, 256):
    for _b in range(1, 256):
        ra = [i for i in range(8) if _a >> i & 1]
        rb = [j for j in range(8) if _b >> j & 1]
        _ADJACENT[_a, _b] = any((j - i) % 8 in (0, 1, 7) for i in ra for j in rb)
del _a, _b


@dataclass
class AuditReport:
    n_samples: int
    theta_violations: list = field(default_factory=list)
    adjacency_violations: list = field(default_factory=list)
    max_theta_excess: float = 0.0

    @property
    def ok(self):
        return not self.theta_violations and not self.adjacency_violations

    def to_jsonl(self):
        head = {"kind": "summary", "n_samples": self.n_samples, "ok": self.ok,
                "theta_violations": len(self.theta_violations),
                "adjacency_violations": len(self.adjacency_violations),
                "max_theta_excess": self.max_theta_excess}
        lines = [json.dumps(head, sort_keys=True)]
        lines += [json.dumps(v, sort_keys=True) for v in self.theta_violations + self.adjacency_violations]
        return "\n".join(lines) + "\n"


class _Replay:
    """Re-runs recorded intervals of a path through the stepping kernel.

    A :class:`StochasticPath` is replayed exactly (same increments, same
    sub-steps).  Anything else is replayed without noise, one base step
    per interval.
    """

    def __init__(self, path, model: GoodwinModel):
        t = np.asarray(path.times, float)
        exact = isinstance(path, StochasticPath) and path.log_x is not None
        if exact:
            self.p = param_vector(model, sigma0=path.sigma0)
            self.z = np.asarray(path.log_x, float)
            self.w = np.asarray(path.log_y, float)
            self.dts = np.full(max(len(t) - 1, 0), path.dt)
            self.stride = path.record_stride
            self.keys = (_kernel_seed(path.seed), path.path_index, path.level, path.max_halvings)
        else:
            self.p = param_vector(model, sigma0=0.0)
            self.z = np.log(np.asarray(path.x, float))
            self.w = np.log(np.asarray(path.y, float))
            self.dts = np.diff(t)
            self.stride = 1
            self.keys = (0, 0, 0, 40)
        self.exact = exact

    def intervals(self):
        out = np.empty((len(self.dts), 5))
        K.replay_intervals(self.p, self.z, self.w, self.dts, self.stride, *self.keys, out)
        return out

    def states(self, j):
        """Sub-step states ``(z, w)`` inside interval ``j``, start excluded."""
        seed, path, level, max_halvings = self.keys
        size = 256
        while True:
            buf = np.empty((size, 4))
            n = K.replay_steps(self.p, self.z[j], self.w[j], self.dts[j], j * self.stride,
                               self.stride, seed, path, level, max_halvings, buf)[0]
            if n <= size:
                return buf[:n, 0], buf[:n, 1]
            size = n


def _segment_masks(model: GoodwinModel, z0, w0, z1, w1, n=65):
    s = np.linspace(0.0, 1.0, n)
    return np.atleast_1d(model.region_mask(np.exp(z0 + s * (z1 - z0)), np.exp(w0 + s * (w1 - w0))))


def _chain_ok(model, zs, ws):
    """Region adjacency along consecutive sub-step states.

    A sub-step whose end points are not neighbours is accepted when the
    straight segment between them, which is the scheme's own interpolation
    inside one sub-step, visits the regions in between.
    """
    masks = np.atleast_1d(model.region_mask(np.exp(zs), np.exp(ws)))
    for i in np.nonzero(~_ADJACENT[masks[:-1], masks[1:]])[0]:
        seg = _segment_masks(model, zs[i], ws[i], zs[i + 1], ws[i + 1])
        if not np.all(_ADJACENT[seg[:-1], seg[1:]]):
            return False
    return True


def region_path_audit(path, params, *, slack=1e-8):
    """Check ``theta`` monotonicity per sign regime and clockwise region adjacency.

    ``path`` is anything with ``times``, ``x`` and ``y`` arrays.  Each
    recorded interval is replayed through the stepping kernel.  Over one
    sub-step ``log theta`` changes by a weighted sum of the theta drift at
    the four stage points (the noise cancels), so an interval belongs to
    the ``above_f`` regime when every stage value of every sub-step is
    negative and to ``below_f`` when every one is positive; mixed
    intervals straddle ``y = f(x)`` and are not judged.  A region change
    between non-neighbours is judged on the replayed sub-step states; the
    final sub-step must land in a region next to the recorded sample.
    """
    model = as_model(params)
    t = np.asarray(path.times, float)
    rep = AuditReport(n_samples=len(t))
    if len(t) < 2:
        return rep
    replay = _Replay(path, model)
    info = replay.intervals()
    d = np.diff(replay.w - replay.z)
    above = info[:, 1] < 0.0
    below = info[:, 0] > 0.0
    # above f (drift < 0) theta must not increase; below f it must not decrease
    excess = np.where(above, d, np.where(below, -d, -np.inf))
    rep.max_theta_excess = float(max(np.max(excess), 0.0))
    for k in np.nonzero(excess > slack)[0]:
        rep.theta_violations.append({
            "kind": "theta", "t": float(t[k + 1]), "t_prev": float(t[k]),
            "regime": "above_f" if above[k] else "below_f", "excess": float(excess[k])})
    masks = np.atleast_1d(model.region_mask(np.exp(replay.z), np.exp(replay.w)))
    for k in np.nonzero(~_ADJACENT[masks[:-1], masks[1:]])[0]:
        zs, ws = replay.states(k)
        zs = np.concatenate([[replay.z[k]], zs])
        ws = np.concatenate([[replay.w[k]], ws])
        landed = _ADJACENT[int(np.atleast_1d(model.region_mask(math.exp(zs[-1]), math.exp(ws[-1])))[0]),
                           masks[k + 1]]
        if landed and _chain_ok(model, zs, ws):
            continue
        rep.adjacency_violations.append({
            "kind": "adjacency", "t": float(t[k + 1]), "t_prev": float(t[k]),
            "from": region_label(int(masks[k])), "to": region_label(int(masks[k + 1]))})
    return rep


__all__ = [
    "SdeConfig", "StochasticPath", "LoopEvents", "BandConstants", "ExitBound", "AuditReport",
    "DomainEscapeError", "CenterHitError", "MissingIncrementsError", "DegenerateBoundError",
    "simulate_sde", "update_winding", "stochastic_period", "economic_series",
    "estimate_constants", "analytic_envelope", "exit_bound", "exit_time_horizon",
    "mu_for_probability", "region_path_audit", "region_label",
]
