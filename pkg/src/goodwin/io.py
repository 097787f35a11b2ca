"""Run configuration, experiment dispatch and hashed artifact manifests.

A run configuration is a JSON object::

    {"model": {...}, "sde": {...}, "experiment": {"kind": "...", ...},
     "output_dir": "..."}

Unknown keys are rejected at every level.  The parsed configuration keeps
exactly the keys that were given, so serialising it reproduces the input.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .model import ConfigError, ModelParams

ENV_OUTPUT_DIR = "GOODWIN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "goodwin-output"


def fmt(v):
    """Shortest round-trip decimal for floats; ``nan``/``inf`` spelled out."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    f = float(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    return repr(f)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([fmt(v) for v in r])
    return path


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2, allow_nan=True)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else fmt(f)
    return obj


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# configuration

# experiment kind -> {field: default}
_NUM = (int, float)
_EXPERIMENT_FIELDS = {
    "equilibria": {},
    "period-table": {"levels": None, "v_min": 1e-3, "v_max": 0.5, "n_levels": 20,
                     "with_return": True},
    "simulate-ode": {"start": None, "v0": 0.05, "t_end": None},
    "simulate-sde": {"start": None, "v0": 0.05},
    "ensemble": {"n_paths": 200, "start": None, "v0": 0.05, "on_line": None, "sigma0": None,
                 "t_max": None, "detector": "winding"},
    "loop-map": {"y_grid": None, "y_min": 0.05, "y_max": 0.96, "n_grid": 20, "n_paths": 500,
                 "sigma0": None, "t_max": None},
    "exit-bound": {"v0": 0.05, "rho": 0.02, "mu": None, "p_lower": 0.9, "n_paths": 2000,
                   "variant": "derived"},
    "regions-audit": {"start": None, "v0": 0.05, "t_max": None},
}

_TOP_KEYS = {"model", "sde", "experiment", "output_dir"}


def _check_number(name, v, *, positive=False, allow_none=False):
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, _NUM) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{name} must be positive, got {v!r}")


def _check_experiment(exp):
    if not isinstance(exp, dict):
        raise ConfigError("experiment must be an object")
    kind = exp.get("kind")
    if kind not in _EXPERIMENT_FIELDS:
        raise ConfigError(f"experiment.kind must be one of {sorted(_EXPERIMENT_FIELDS)}, got {kind!r}")
    allowed = _EXPERIMENT_FIELDS[kind]
    unknown = sorted(set(exp) - set(allowed) - {"kind"})
    if unknown:
        raise ConfigError(f"unknown keys for experiment {kind!r}: {unknown}")
    for key in ("v0", "rho", "v_min", "v_max", "y_min", "y_max", "t_end", "t_max", "mu"):
        if key in exp:
            _check_number(f"experiment.{key}", exp[key], positive=key != "rho", allow_none=True)
    for key in ("n_levels", "n_paths", "n_grid"):
        if key in exp:
            v = exp[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"experiment.{key} must be a positive integer, got {v!r}")
    if "start" in exp and exp["start"] is not None:
        s = exp["start"]
        if not (isinstance(s, list) and len(s) == 2):
            raise ConfigError("experiment.start must be [x, y]")
        for v in s:
            _check_number("experiment.start", v)
    for key in ("levels", "y_grid"):
        if key in exp and exp[key] is not None:
            if not isinstance(exp[key], list) or not exp[key]:
                raise ConfigError(f"experiment.{key} must be a non-empty list")
            for v in exp[key]:
                _check_number(f"experiment.{key}", v, positive=True)
    if "sigma0" in exp and exp["sigma0"] is not None:
        _check_number("experiment.sigma0", exp["sigma0"])
        if exp["sigma0"] < 0:
            raise ConfigError("experiment.sigma0 must be non-negative")
    if "on_line" in exp and exp["on_line"] is not None:
        _check_number("experiment.on_line", exp["on_line"], positive=True)
    if "p_lower" in exp:
        _check_number("experiment.p_lower", exp["p_lower"])
        if not 0.0 < exp["p_lower"] < 1.0:
            raise ConfigError("experiment.p_lower must lie in (0, 1)")
    if "variant" in exp and exp["variant"] not in ("derived", "printed"):
        raise ConfigError("experiment.variant must be 'derived' or 'printed'")
    if "detector" in exp and exp["detector"] not in ("line", "winding"):
        raise ConfigError("experiment.detector must be 'line' or 'winding'")
    if "with_return" in exp and not isinstance(exp["with_return"], bool):
        raise ConfigError("experiment.with_return must be a boolean")


@dataclass(frozen=True)
class RunConfig:
    raw: dict

    @classmethod
    def from_dict(cls, data):
        from .stochastic import SdeConfig

        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - _TOP_KEYS)
        if unknown:
            raise ConfigError(f"unknown top-level keys: {unknown}")
        for key in ("model", "experiment"):
            if key not in data:
                raise ConfigError(f"missing required section {key!r}")
        ModelParams.from_dict(data["model"])
        SdeConfig.from_dict(data.get("sde", {}))
        _check_experiment(data["experiment"])
        if "output_dir" in data and not isinstance(data["output_dir"], str):
            raise ConfigError("output_dir must be a string")
        return cls(copy.deepcopy(data))

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(text)

    def to_dict(self):
        return copy.deepcopy(self.raw)

    def to_json(self):
        return json.dumps(self.raw, sort_keys=True, indent=2)

    @property
    def params(self):
        return ModelParams.from_dict(self.raw["model"])

    @property
    def sde(self):
        from .stochastic import SdeConfig

        return SdeConfig.from_dict(self.raw.get("sde", {}))

    @property
    def kind(self):
        return self.raw["experiment"]["kind"]

    def option(self, key):
        exp = self.raw["experiment"]
        return exp[key] if key in exp else _EXPERIMENT_FIELDS[self.kind][key]

    def with_seed(self, seed):
        d = self.to_dict()
        d.setdefault("sde", {})["seed"] = seed
        return RunConfig.from_dict(d)

    def output_dir(self, env=None):
        env = os.environ if env is None else env
        return self.raw.get("output_dir") or env.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR


# ---------------------------------------------------------------------------
# experiments


def _start_point(cfg: RunConfig, model):
    from .deterministic import level_extent

    start = cfg.option("start")
    if start is not None:
        return float(start[0]), float(start[1])
    return float(level_extent(cfg.option("v0"), model)[0]), model.equilibria.y_hat


def _exp_equilibria(cfg, model, out):
    from .deterministic import linearized_period

    e = model.equilibria
    rows = [("x_hat", e.x_hat), ("y_hat", e.y_hat), ("x_tilde", e.x_tilde), ("y_tilde", e.y_tilde),
            ("theta_hat", e.theta_hat), ("theta_tilde", e.theta_tilde),
            ("linearized_period", linearized_period(model))]
    return [write_csv(os.path.join(out, "equilibria.csv"), ["quantity", "value"], rows)]


def _exp_period_table(cfg, model, out):
    from .deterministic import orbit_period, period_by_return

    levels = cfg.option("levels")
    if levels is None:
        levels = np.geomspace(cfg.option("v_min"), cfg.option("v_max"), cfg.option("n_levels"))
    rows = []
    for v0 in levels:
        pr = orbit_period(v0, model)
        t_ret = math.nan
        if cfg.option("with_return"):
            t_ret = period_by_return((pr.x_under, model.equilibria.y_hat), model, cfg.sde.dt,
                                     t_max=max(3.0 * pr.t_formula, 1.0))
        rows.append([pr.v0, pr.t_formula, t_ret, pr.x_under, pr.x_bar])
    header = ["v0", "t_formula", "t_return", "x_under", "x_bar"]
    return [write_csv(os.path.join(out, "periods.csv"), header, rows)]


def _exp_simulate_ode(cfg, model, out):
    from .deterministic import integrate_ode, orbit_period

    start = _start_point(cfg, model)
    t_end = cfg.option("t_end")
    if t_end is None:
        v0 = float(model.V(*start))
        t_end = orbit_period(v0, model).t_formula
    sde = cfg.sde
    traj = integrate_ode(start, t_end, model, sde.dt, record_stride=sde.record_stride)
    path = os.path.join(out, "trajectory.csv")
    traj.to_csv(path)
    return [path]


def _exp_simulate_sde(cfg, model, out):
    from .stochastic import simulate_sde

    start = _start_point(cfg, model)
    p = simulate_sde(start, cfg.sde, model)
    csv_path = os.path.join(out, "path.csv")
    p.to_csv(csv_path, model)
    ev = p.events
    loop = {"start": list(start), "seed": cfg.sde.seed, **ev.__dict__,
            "substeps": p.substeps, "max_halvings_used": p.max_depth}
    return [csv_path, write_json(os.path.join(out, "loop.json"), loop)]


def _ensemble_start(cfg, model):
    if cfg.option("on_line") is not None:
        return ("on_line", float(cfg.option("on_line")))
    if cfg.option("start") is not None:
        return ("point", tuple(cfg.option("start")))
    return ("level", float(cfg.option("v0")))


def _exp_ensemble(cfg, model, out):
    from .montecarlo import EnsembleSpec, run_ensemble

    sde = cfg.sde
    spec = EnsembleSpec(n_paths=cfg.option("n_paths"), start=_ensemble_start(cfg, model),
                        sigma0=cfg.option("sigma0"), t_max=cfg.option("t_max"),
                        base_seed=sde.seed, dt=sde.dt, max_halvings=sde.max_halvings,
                        detector=cfg.option("detector"), line_slope=sde.line_slope)
    st = run_ensemble(spec, model)
    return [write_json(os.path.join(out, "ensemble.json"), {"spec": spec.to_dict(), "stats": st.to_dict()})]


def _exp_loop_map(cfg, model, out):
    from .montecarlo import EnsembleSpec, NoSignChangeError, fixed_point, loop_map

    sde = cfg.sde
    grid = cfg.option("y_grid")
    if grid is None:
        grid = np.linspace(cfg.option("y_min"), cfg.option("y_max"), cfg.option("n_grid"))
    spec = EnsembleSpec(n_paths=cfg.option("n_paths"), start=("on_line", float(grid[0])),
                        sigma0=cfg.option("sigma0"), t_max=cfg.option("t_max"),
                        base_seed=sde.seed, dt=sde.dt, max_halvings=sde.max_halvings,
                        detector="line", line_slope=sde.line_slope)
    table = loop_map(grid, spec, model)
    csv_path = os.path.join(out, "loop_map.csv")
    table.to_csv(csv_path)
    try:
        fp = fixed_point(table)
        rec = {"y_star": fp.y_star, "ci_low": fp.ci_low, "ci_high": fp.ci_high,
               "bracket": list(fp.bracket), "crossings": [list(c) for c in fp.crossings],
               "degenerate": fp.degenerate}
    except NoSignChangeError as exc:
        rec = {"y_star": None, "error": str(exc)}
    return [csv_path, write_json(os.path.join(out, "fixed_point.json"), rec)]


def _exp_exit_bound(cfg, model, out):
    from .montecarlo import bound_validation
    from .stochastic import estimate_constants, mu_for_probability

    v0, rho = cfg.option("v0"), cfg.option("rho")
    consts = estimate_constants(v0, rho, model)
    mu = cfg.option("mu")
    if mu is None:
        mu = mu_for_probability(cfg.option("p_lower"), consts.i_const) if consts.i_const > 0 else 1.0
    rec = bound_validation(v0, rho, mu, cfg.option("n_paths"), model, base_seed=cfg.sde.seed,
                           dt=cfg.sde.dt, variant=cfg.option("variant"), constants=consts)
    d = rec.to_dict()
    d["r_point"] = list(consts.r_point)
    d["i_point"] = list(consts.i_point)
    return [write_json(os.path.join(out, "exit_bound.json"), d)]


def _exp_regions_audit(cfg, model, out):
    from .stochastic import region_path_audit, simulate_sde

    start = _start_point(cfg, model)
    sde = cfg.sde
    if cfg.option("t_max") is not None:
        sde = sde.replace(t_max=float(cfg.option("t_max")))
    p = simulate_sde(start, sde, model)
    rep = region_path_audit(p, model)
    path = os.path.join(out, "audit.jsonl")
    with open(path, "w") as fh:
        fh.write(rep.to_jsonl())
    csv_path = os.path.join(out, "path.csv")
    p.to_csv(csv_path, model)
    return [path, csv_path]


EXPERIMENTS = {
    "equilibria": _exp_equilibria,
    "period-table": _exp_period_table,
    "simulate-ode": _exp_simulate_ode,
    "simulate-sde": _exp_simulate_sde,
    "ensemble": _exp_ensemble,
    "loop-map": _exp_loop_map,
    "exit-bound": _exp_exit_bound,
    "regions-audit": _exp_regions_audit,
}


def run(cfg: RunConfig, *, output_dir=None, plots=True):
    """Run the configured experiment; returns the manifest dictionary.

    Raises :class:`ConfigError` or :class:`AssumptionError` before any file
    is written when the configuration or the parameters are unusable.
    """
    from . import __version__
    from .model import as_model, require_assumptions

    params = cfg.params
    require_assumptions(params)
    model = as_model(params)
    out = output_dir or cfg.output_dir()
    os.makedirs(out, exist_ok=True)
    paths = EXPERIMENTS[cfg.kind](cfg, model, out)
    names = [os.path.basename(p) for p in paths]
    # the stored copy leaves out where it was written, so hashes do not depend on it
    stored = {k: v for k, v in cfg.to_dict().items() if k != "output_dir"}
    with open(os.path.join(out, "config.json"), "w") as fh:
        fh.write(json.dumps(stored, sort_keys=True, indent=2) + "\n")
    names.append("config.json")
    if plots:
        from .plotting import render_plots

        names += render_plots(names, out, model)
    manifest = {
        "experiment": cfg.kind,
        "package_version": __version__,
        "artifacts": [{"path": n, "sha256": sha256_file(os.path.join(out, n)),
                       "bytes": os.path.getsize(os.path.join(out, n))} for n in sorted(set(names))],
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    return manifest
