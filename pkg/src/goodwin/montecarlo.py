"""Ensembles of stochastic loops: loop statistics, the loop map and bound checks.

Every path of an ensemble draws its noise from ``(base_seed, index)``, so a
result depends only on the spec, never on the number of worker threads or
on scheduling; statistics are folded in index order.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import _kernels as K
from .deterministic import level_extent, linearized_period, param_vector
from .model import ConfigError, GoodwinError, GoodwinModel, ModelParams, as_model, require_assumptions
from .stochastic import (DegenerateBoundError, SdeConfig, _kernel_seed, exit_bound,
                         estimate_constants, line_log_slope)


class AllIncompleteError(GoodwinError, ArithmeticError):
    """No path of the ensemble completed a loop before the horizon."""


class NoSignChangeError(GoodwinError, ValueError):
    """The loop map stays on one side of the diagonal over the grid."""


class VacuousBoundWarning(UserWarning):
    """``p_lower <= 0``: the exit-time bound says nothing."""


_START_KINDS = ("point", "on_line", "level")


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble definition.

    ``start`` is ``("point", (x, y))``, ``("on_line", y0)`` for
    ``(y0/theta, y0)`` on the reference line, or ``("level", v0)`` for
    ``(x_under(v0), y_hat)``.  ``sigma0 = None`` keeps the model's value;
    ``t_max = None`` means 50 linearized periods.
    """

    n_paths: int
    start: tuple
    sigma0: float | None = None
    t_max: float | None = None
    base_seed: int = 0
    dt: float = 1e-3
    max_halvings: int = 40
    detector: str = "line"
    line_slope: str | float = "tilde"

    def __post_init__(self):
        if isinstance(self.n_paths, bool) or not isinstance(self.n_paths, int) or self.n_paths < 1:
            raise ConfigError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if (not isinstance(self.start, (tuple, list)) or len(self.start) != 2
                or self.start[0] not in _START_KINDS):
            raise ConfigError(f"start must be one of {_START_KINDS} with a value, got {self.start!r}")
        if self.detector not in ("line", "winding"):
            raise ConfigError(f"detector must be 'line' or 'winding', got {self.detector!r}")
        if self.sigma0 is not None and not (self.sigma0 >= 0):
            raise ConfigError("sigma0 must be non-negative")
        # reuse the field checks of the path configuration
        self.sde_config(1.0)

    def sde_config(self, t_max):
        return SdeConfig(dt=self.dt, seed=self.base_seed, max_halvings=self.max_halvings,
                         t_max=t_max, line_slope=self.line_slope)

    def model(self, params):
        model = as_model(params)
        if self.sigma0 is None or self.sigma0 == model.sigma0:
            return model
        return GoodwinModel.from_params(model.params.replace(sigma0=float(self.sigma0)))

    def start_point(self, model: GoodwinModel):
        kind, value = self.start
        e = model.equilibria
        if kind == "point":
            x, y = map(float, value)
        elif kind == "on_line":
            y = float(value)
            x = y / math.exp(line_log_slope(self.sde_config(1.0), model))
        else:
            x = float(level_extent(float(value), model)[0])
            y = e.y_hat
        if not (x > 0 and 0 < y < 1):
            raise ConfigError(f"start ({x!r}, {y!r}) is outside D")
        return x, y

    def to_dict(self):
        d = asdict(self)
        d["start"] = [self.start[0], list(self.start[1]) if self.start[0] == "point" else self.start[1]]
        return d


@dataclass(frozen=True)
class EnsembleStats:
    mean_S: float
    se_S: float
    mean_yS: float
    se_yS: float
    completion_fraction: float
    n_effective: int
    n_paths: int
    n_failed: int = 0
    detector: str = "line"
    mean_S_winding: float = math.nan
    completion_winding: float = math.nan
    detector_agreement: float = math.nan

    def to_dict(self):
        return asdict(self)


def _mean_se(v):
    n = v.size
    if n == 0:
        return math.nan, math.nan
    m = float(np.mean(v))
    if n == 1:
        return m, 0.0
    return m, float(np.std(v, ddof=1) / math.sqrt(n))


def simulate_loops(spec: EnsembleSpec, params, *, first_index=0):
    """Event records (one row per path, kernel layout) for the ensemble."""
    model = spec.model(params)
    require_assumptions(model.params)
    t_max = spec.t_max if spec.t_max is not None else 50.0 * linearized_period(model)
    x0, y0 = spec.start_point(model)
    cfg = spec.sde_config(t_max)
    p = param_vector(model)
    starts = np.tile([math.log(x0), math.log(y0)], (spec.n_paths, 1))
    ids = np.arange(first_index, first_index + spec.n_paths, dtype=np.int64)
    return K.run_ensemble(p, starts, cfg.dt, cfg.n_steps, _kernel_seed(cfg.seed), ids, 0,
                          cfg.max_halvings, K.STOP_WIND | K.STOP_LINE, 0.0, 0.0,
                          line_log_slope(cfg, model))


def summarize(ev, detector="line", *, period=None):
    """Fold kernel event records into :class:`EnsembleStats`.

    ``period`` (the linearised period) sets the tolerance for counting the
    two loop detectors as agreeing.
    """
    ok = ev[:, K.E_STATUS] == K.STATUS_OK
    wind = ok & (ev[:, K.E_WIND_DONE] > 0)
    line = ok & (ev[:, K.E_LINE_DONE] > 0)
    if detector == "line":
        done, s_col, y_col = line, K.E_LINE_T, K.E_LINE_Y
    else:
        done, s_col, y_col = wind, K.E_WIND_T, K.E_WIND_Y
    n = ev.shape[0]
    n_eff = int(np.count_nonzero(done))
    if n_eff == 0:
        raise AllIncompleteError(f"none of {n} paths completed a loop before the horizon")
    mS, sS = _mean_se(ev[done, s_col])
    mY, sY = _mean_se(ev[done, y_col])
    both = wind & line
    agree = math.nan
    if period is not None and np.any(both):
        agree = float(np.mean(np.abs(ev[both, K.E_LINE_T] - ev[both, K.E_WIND_T]) <= period))
    return EnsembleStats(
        mean_S=mS, se_S=sS, mean_yS=mY, se_yS=sY,
        completion_fraction=n_eff / n, n_effective=n_eff, n_paths=n,
        n_failed=int(np.count_nonzero(~ok)), detector=detector,
        mean_S_winding=float(np.mean(ev[wind, K.E_WIND_T])) if np.any(wind) else math.nan,
        completion_winding=float(np.count_nonzero(wind)) / n,
        detector_agreement=agree,
    )


def run_ensemble(spec: EnsembleSpec, params):
    """Loop statistics of ``spec.n_paths`` independent paths."""
    model = spec.model(params)
    ev = simulate_loops(spec, model)
    return summarize(ev, spec.detector, period=linearized_period(model))


# ---------------------------------------------------------------------------
# loop map


@dataclass(frozen=True)
class LoopMapRow:
    y0: float
    stats: EnsembleStats | None
    error: str | None = None

    def csv_row(self):
        s = self.stats
        if s is None:
            return [self.y0, math.nan, math.nan, math.nan, math.nan, 0.0]
        return [self.y0, s.mean_yS, s.se_yS, s.mean_S, s.se_S, s.completion_fraction]


@dataclass(frozen=True)
class LoopMapTable:
    rows: tuple
    sigma0: float = math.nan

    HEADER = ("y0", "mean_yS", "se_yS", "mean_S", "se_S", "completion_fraction")

    @property
    def y0(self):
        return np.array([r.y0 for r in self.rows])

    @property
    def mean_yS(self):
        return np.array([r.stats.mean_yS if r.stats else math.nan for r in self.rows])

    @property
    def se_yS(self):
        return np.array([r.stats.se_yS if r.stats else math.nan for r in self.rows])

    def to_csv(self, path):
        from .io import fmt

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(self.HEADER)
            for r in self.rows:
                wr.writerow([fmt(v) for v in r.csv_row()])

    @classmethod
    def from_csv(cls, path):
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                st = EnsembleStats(mean_S=float(rec["mean_S"]), se_S=float(rec["se_S"]),
                                   mean_yS=float(rec["mean_yS"]), se_yS=float(rec["se_yS"]),
                                   completion_fraction=float(rec["completion_fraction"]),
                                   n_effective=0, n_paths=0)
                ok = math.isfinite(st.mean_yS)
                rows.append(LoopMapRow(float(rec["y0"]), st if ok else None,
                                       None if ok else "incomplete"))
        return cls(tuple(rows))


def loop_map(y_grid, spec: EnsembleSpec, params):
    """``y0 -> E[y_S]`` for starts ``(y0/theta, y0)`` on the reference line.

    A grid point whose ensemble fails is kept as a flagged row.
    """
    model = spec.model(params)
    e = model.equilibria
    rows = []
    for y0 in map(float, y_grid):
        if not 0.0 < y0 < e.y_tilde:
            raise ConfigError(f"loop-map starts need 0 < y0 < y_tilde, got {y0!r}")
        row_spec = EnsembleSpec(**{**asdict(spec), "start": ("on_line", y0)})
        try:
            rows.append(LoopMapRow(y0, run_ensemble(row_spec, model)))
        except (AllIncompleteError, ArithmeticError) as exc:
            rows.append(LoopMapRow(y0, None, str(exc)))
    return LoopMapTable(tuple(rows), sigma0=model.sigma0)


@dataclass(frozen=True)
class FixedPoint:
    y_star: float
    ci_low: float
    ci_high: float
    bracket: tuple = ()
    crossings: tuple = ()
    degenerate: bool = False

    @property
    def ci_width(self):
        return self.ci_high - self.ci_low


def fixed_point(table, *, z=1.96, identity_tol=1e-9):
    """Crossing of ``mean_yS - y0`` through zero, by inverse linear interpolation.

    The confidence interval propagates the standard errors of the two
    bracketing rows.  A map that equals the identity on the whole grid
    (no noise) is reported as degenerate.
    """
    y0 = np.asarray(table.y0, float)
    m = np.asarray(table.mean_yS, float)
    se = np.nan_to_num(np.asarray(table.se_yS, float), nan=0.0)
    ok = np.isfinite(m)
    y0, m, se = y0[ok], m[ok], se[ok]
    d = m - y0
    if y0.size and np.all(np.abs(d) <= identity_tol * np.maximum(1.0, np.abs(y0))) and np.all(se == 0):
        return FixedPoint(math.nan, float(y0.min()), float(y0.max()), degenerate=True)
    crossings = []
    for i in range(len(d) - 1):
        if d[i] == 0.0:
            crossings.append((i, i))
        elif d[i] * d[i + 1] < 0:
            crossings.append((i, i + 1))
    if len(d) and d[-1] == 0.0:
        crossings.append((len(d) - 1, len(d) - 1))
    if not crossings:
        side = "above" if np.all(d > 0) else "below"
        raise NoSignChangeError(f"mean_yS stays {side} the diagonal on the grid")
    i, j = crossings[0]
    if i == j:
        ys, s = y0[i], z * se[i]
    else:
        dy = y0[j] - y0[i]
        den = d[i] - d[j]
        ys = y0[i] + dy * d[i] / den
        gi = -dy * d[j] / den ** 2
        gj = dy * d[i] / den ** 2
        s = z * math.hypot(gi * se[i], gj * se[j])
    return FixedPoint(float(ys), float(ys - s), float(ys + s), bracket=(float(y0[i]), float(y0[j])),
                      crossings=tuple((float(y0[a]), float(y0[b])) for a, b in crossings))


# ---------------------------------------------------------------------------
# domain invariance


@dataclass(frozen=True)
class DomainSweep:
    n_paths: int
    n_steps: int
    dt: float
    sigma0: float
    n_out_of_domain: int
    n_failed: int
    substeps: int
    max_depth: int
    min_y_end: float
    max_y_end: float

    @property
    def ok(self):
        return self.n_out_of_domain == 0 and self.n_failed == 0

    def to_dict(self):
        return asdict(self)


def domain_sweep(n_paths, n_steps, params, *, v0=0.05, dt=1e-3, base_seed=0, max_halvings=40):
    """Run ``n_paths`` full-length paths from ``(x_under(v0), y_hat)`` and count domain failures.

    ``n_out_of_domain`` counts accepted sub-steps outside ``D``;
    ``n_failed`` counts paths that exhausted the reject-and-halve budget.
    """
    model = as_model(params)
    require_assumptions(model.params)
    x0 = float(level_extent(v0, model)[0])
    y0 = model.equilibria.y_hat
    p = param_vector(model)
    starts = np.tile([math.log(x0), math.log(y0)], (n_paths, 1))
    ev = K.run_ensemble(p, starts, dt, int(n_steps), _kernel_seed(base_seed),
                        np.arange(n_paths, dtype=np.int64), 0, max_halvings, 0, 0.0, 0.0, 0.0)
    y_end = np.exp(ev[:, K.E_W])
    return DomainSweep(
        n_paths=int(n_paths), n_steps=int(n_steps), dt=float(dt), sigma0=model.sigma0,
        n_out_of_domain=int(ev[:, K.E_OUT].sum()),
        n_failed=int(np.count_nonzero(ev[:, K.E_STATUS] != K.STATUS_OK)),
        substeps=int(ev[:, K.E_SUBSTEPS].sum()), max_depth=int(ev[:, K.E_MAX_DEPTH].max()),
        min_y_end=float(y_end.min()), max_y_end=float(y_end.max()),
    )


# ---------------------------------------------------------------------------
# exit-time bound


def survival_fraction(v0, rho, horizon, n_paths, params, *, base_seed=0, dt=1e-3, max_halvings=40):
    """Fraction of paths from ``(x_under(v0), y_hat)`` that stay in ``|V - v0| <= rho`` up to ``horizon``."""
    model = as_model(params)
    require_assumptions(model.params)
    x0 = float(level_extent(v0, model)[0])
    y0 = model.equilibria.y_hat
    n_steps = int(math.ceil(horizon / dt))
    p = param_vector(model)
    starts = np.tile([math.log(x0), math.log(y0)], (n_paths, 1))
    ev = K.run_ensemble(p, starts, dt, n_steps, _kernel_seed(base_seed),
                        np.arange(n_paths, dtype=np.int64), 0, max_halvings, K.STOP_BAND,
                        float(v0), float(rho), 0.0)
    if np.any(ev[:, K.E_STATUS] != K.STATUS_OK):
        raise ArithmeticError("reject-and-halve budget exhausted in the bound ensemble")
    exited = (ev[:, K.E_BAND_DONE] > 0) & (ev[:, K.E_BAND_T] <= horizon)
    return 1.0 - np.count_nonzero(exited) / n_paths


@dataclass(frozen=True)
class BoundValidation:
    v0: float
    rho: float
    mu: float
    n_paths: int
    base_seed: int
    dt: float
    sigma0: float
    variant: str
    theta: float
    p_lower: float
    p_lower_raw: float
    r_const: float
    i_const: float
    empirical: float
    wilson_low: float
    wilson_high: float
    combined_se: float
    passed: bool
    passed_wilson: bool
    vacuous: bool
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def bound_validation(v0, rho, mu, n_paths, params, *, base_seed=0, dt=1e-3, variant="derived",
                     constants=None, z=3.0):
    """Compare ``P(tau_rho > Theta)`` estimated from ``n_paths`` paths with the lower bound.

    ``passed`` uses ``empirical >= p_lower - z * combined_se`` where the
    combined standard error adds the binomial variances at the empirical
    fraction and at ``p_lower``; ``passed_wilson`` asks the Wilson interval
    lower edge to reach ``p_lower - z * half_width``.
    """
    model = as_model(params)
    prm: ModelParams = model.params
    try:
        eb = exit_bound(v0, rho, mu, model, variant=variant, constants=constants)
        theta, p_lower, raw, r, i = eb.theta, eb.p_lower, eb.p_lower_raw, eb.r_const, eb.i_const
    except DegenerateBoundError:
        theta, r, i = math.inf, 0.0, 0.0
        raw = 1.0 - i / (mu * mu)
        p_lower = min(max(raw, 0.0), 1.0)
    vacuous = raw <= 0.0
    if vacuous:
        warnings.warn(f"p_lower = {raw:.4g} <= 0: the bound is vacuous", VacuousBoundWarning,
                      stacklevel=2)
    if math.isinf(theta):
        frac = 1.0
    else:
        frac = survival_fraction(v0, rho, theta, n_paths, model, base_seed=base_seed, dt=dt)
    k = int(round(frac * n_paths))
    ci = stats.binomtest(k, n_paths).proportion_ci(confidence_level=0.95, method="wilson")
    half = 0.5 * (ci.high - ci.low)
    cse = math.sqrt(frac * (1 - frac) / n_paths + p_lower * (1 - p_lower) / n_paths)
    return BoundValidation(
        v0=float(v0), rho=float(rho), mu=float(mu), n_paths=int(n_paths), base_seed=int(base_seed),
        dt=float(dt), sigma0=model.sigma0, variant=variant, theta=theta, p_lower=p_lower,
        p_lower_raw=raw, r_const=r, i_const=i, empirical=frac, wilson_low=float(ci.low),
        wilson_high=float(ci.high), combined_se=cse,
        passed=bool(frac >= p_lower - z * cse),
        passed_wilson=bool(ci.low >= p_lower - z * half),
        vacuous=vacuous, params=prm.to_dict() if prm is not None else {},
    )


def probability_to_mu(p_lower, v0, rho, params):
    """``mu`` giving the requested ``p_lower`` at ``(v0, rho)``."""
    from .stochastic import mu_for_probability

    return mu_for_probability(p_lower, estimate_constants(v0, rho, params).i_const)
