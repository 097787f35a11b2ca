import csv
import json
import re

import numpy as np
import pytest

from goodwin import cli
from goodwin.deterministic import orbit_period
from goodwin.io import ENV_OUTPUT_DIR, RunConfig, fmt, run
from goodwin.model import PRESET, ConfigError, GoodwinModel
from goodwin.montecarlo import EnsembleStats, LoopMapRow, LoopMapTable, fixed_point
from goodwin.plotting import (ACCENT, INK, EmptyPlotError, MissingArtifactError, plot_loop_map,
                              plot_phase)

MODEL = {"alpha": 0.025, "gamma": 0.055, "nu": 3.0, "phi0": -0.040064, "phi1": 0.000064,
         "sigma0": 0.1}


def config(experiment, **sde):
    return {"model": dict(MODEL), "sde": {"dt": 1e-3, "seed": 7, **sde}, "experiment": experiment}


def write_config(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def svg_paths(path, stroke):
    text = open(path).read()
    out = []
    for m in re.finditer(r'<path d="([^"]*)"[^>]*style="([^"]*)"', text):
        if f"stroke: {stroke}" in m.group(2):
            nums = [float(v) for v in re.findall(r"-?\d+(?:\.\d+)?", m.group(1))]
            out.append(np.array(nums).reshape(-1, 2))
    return out


def test_fmt_shortest_round_trip():
    for v in (0.1, 1 / 3, 1e-300, 0.835, 2.0 ** 60):
        assert float(fmt(v)) == v
        assert fmt(v) == repr(float(v))
    assert fmt(float("nan")) == "nan"


def test_config_round_trip():
    cfg = config({"kind": "ensemble", "n_paths": 20, "v0": 0.05})
    parsed = RunConfig.from_dict(cfg)
    again = RunConfig.from_json(parsed.to_json())
    assert again.to_dict() == parsed.to_dict()
    d = parsed.to_dict()
    assert set(d["experiment"]) == {"kind", "n_paths", "v0"}
    assert d["model"]["nu"] == 3.0 and d["sde"]["seed"] == 7


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(extra=1),
    lambda c: c["experiment"].update(bogus=1),
    lambda c: c["model"].update(omega=2),
    lambda c: c["sde"].update(dtt=1),
    lambda c: c["experiment"].update(kind="poincare"),
    lambda c: c["experiment"].update(n_paths=0),
    lambda c: c["experiment"].update(detector="radar"),
])
def test_config_rejects(mutate):
    cfg = config({"kind": "ensemble"})
    mutate(cfg)
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cfg)


def test_equilibria_run(tmp_path):
    out = tmp_path / "eq"
    code = cli.main(["--config", write_config(tmp_path, config({"kind": "equilibria"})),
                     "--output", str(out)])
    assert code == 0
    rows = {r["quantity"]: float(r["value"]) for r in read_csv(out / "equilibria.csv")}
    assert rows["x_hat"] == 0.835
    man = json.loads((out / "manifest.json").read_text())
    assert [a["path"] for a in man["artifacts"]] == ["config.json", "equilibria.csv"]


def test_missing_nu_is_config_error(tmp_path, capsys):
    cfg = config({"kind": "equilibria"})
    del cfg["model"]["nu"]
    out = tmp_path / "none"
    code = cli.main(["--config", write_config(tmp_path, cfg), "--output", str(out)])
    assert code == cli.EXIT_CONFIG
    assert not out.exists()
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and err["error"] == "ConfigError"


def test_assumption_failure_exit(tmp_path, capsys):
    cfg = config({"kind": "equilibria"})
    cfg["model"]["phi0"] = 0.040064
    out = tmp_path / "none"
    code = cli.main(["--config", write_config(tmp_path, cfg), "--output", str(out)])
    assert code == cli.EXIT_ASSUMPTION and not out.exists()
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "AssumptionError" and "assumptions" in err


def test_unreadable_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["--config", str(p)]) == cli.EXIT_CONFIG
    assert cli.main(["--config", str(tmp_path / "absent.json")]) == cli.EXIT_CONFIG


def test_bad_flags():
    with pytest.raises(SystemExit):
        cli.main(["--config", "x.json", "--seed", "-1"])
    with pytest.raises(SystemExit):
        cli.main(["--config", "x.json", "--threads", "0"])


def test_period_table_matches_orbit_period(tmp_path):
    levels = [1e-3, 0.01, 0.1, 0.5]
    cfg = config({"kind": "period-table", "levels": levels, "with_return": False})
    run(RunConfig.from_dict(cfg), output_dir=str(tmp_path), plots=False)
    rows = read_csv(tmp_path / "periods.csv")
    m = GoodwinModel.from_params(PRESET)
    assert len(rows) == len(levels)
    for r, v in zip(rows, levels):
        pr = orbit_period(v, m)
        assert float(r["v0"]) == v
        assert float(r["t_formula"]) == pr.t_formula
        assert float(r["x_under"]) == pr.x_under and float(r["x_bar"]) == pr.x_bar


def test_default_period_table_has_twenty_rows(tmp_path):
    cfg = config({"kind": "period-table", "with_return": False})
    run(RunConfig.from_dict(cfg), output_dir=str(tmp_path), plots=True)
    assert len(read_csv(tmp_path / "periods.csv")) == 20
    assert (tmp_path / "period_vs_level.svg").exists()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(target))
    assert cli.main(["--config", write_config(tmp_path, config({"kind": "equilibria"})),
                     "--no-plots"]) == 0
    assert (target / "manifest.json").exists()


def test_seed_override_changes_path(tmp_path):
    cfg = write_config(tmp_path, config({"kind": "simulate-sde"}, t_max=2.0, record_stride=10))
    hashes = []
    for seed in ("1", "2", "1"):
        out = tmp_path / f"s{len(hashes)}"
        assert cli.main(["--config", cfg, "--output", str(out), "--seed", seed, "--no-plots"]) == 0
        man = json.loads((out / "manifest.json").read_text())
        hashes.append({a["path"]: a["sha256"] for a in man["artifacts"]}["path.csv"])
    assert hashes[0] == hashes[2] != hashes[1]
    stored = json.loads((tmp_path / "s1" / "config.json").read_text())
    assert stored["sde"]["seed"] == 2


def test_thread_flag(tmp_path):
    import numba

    cfg = write_config(tmp_path, config({"kind": "ensemble", "n_paths": 4}))
    outs = []
    for threads in ("1", str(numba.config.NUMBA_NUM_THREADS)):
        out = tmp_path / f"t{threads}"
        assert cli.main(["--config", cfg, "--output", str(out), "--threads", threads]) == 0
        outs.append((out / "ensemble.json").read_bytes())
    assert outs[0] == outs[1]
    too_many = str(numba.config.NUMBA_NUM_THREADS + 1)
    assert cli.main(["--config", cfg, "--threads", too_many]) == cli.EXIT_CONFIG


def test_manifest_reproducible(tmp_path):
    raw = config({"kind": "simulate-sde"}, t_max=30.0, record_stride=10)
    raw["model"].update(beta=0.02, a0=1.0, N0=1.0)
    cfg = write_config(tmp_path, raw)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["--config", cfg, "--output", str(a)]) == 0
    assert cli.main(["--config", cfg, "--output", str(b)]) == 0
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    names = {x["path"] for x in json.loads((a / "manifest.json").read_text())["artifacts"]}
    assert {"path.csv", "loop.json", "path_phase.svg", "path_output.svg"} <= names


def test_plot_missing_and_empty(tmp_path):
    with pytest.raises(MissingArtifactError):
        plot_phase(tmp_path / "nope.csv", tmp_path / "p.svg", PRESET)
    (tmp_path / "empty.csv").write_text("t,x,y,V\n")
    with pytest.raises(EmptyPlotError):
        plot_phase(tmp_path / "empty.csv", tmp_path / "p.svg", PRESET)


def test_orbit_plot_is_closed(tmp_path):
    cfg = config({"kind": "simulate-ode", "v0": 0.05}, record_stride=1)
    run(RunConfig.from_dict(cfg), output_dir=str(tmp_path))
    (orbit,) = svg_paths(tmp_path / "trajectory_phase.svg", INK)
    assert len(orbit) > 1000
    # figure coordinates are points; the line is 0.6 pt wide
    assert np.hypot(*(orbit[0] - orbit[-1])) < 0.3


def test_loop_map_plot_marks_fixed_point(tmp_path):
    def row(y0, m):
        return LoopMapRow(y0, EnsembleStats(1.0, 0.0, m, 0.01, 1.0, 10, 10))

    tab = LoopMapTable((row(0.2, 0.3), row(0.4, 0.35), row(0.6, 0.5)))
    tab.to_csv(tmp_path / "loop_map.csv")
    plot_loop_map(tmp_path / "loop_map.csv", tmp_path / "loop_map.svg")
    svg = (tmp_path / "loop_map.svg").read_text()
    assert ACCENT in svg
    y_star = fixed_point(tab).y_star
    assert f"fixed point {y_star:.3f}" in svg


def test_loop_map_plot_without_crossing(tmp_path):
    def row(y0, m):
        return LoopMapRow(y0, EnsembleStats(1.0, 0.0, m, 0.01, 1.0, 10, 10))

    LoopMapTable((row(0.2, 0.3), row(0.4, 0.5))).to_csv(tmp_path / "loop_map.csv")
    plot_loop_map(tmp_path / "loop_map.csv", tmp_path / "loop_map.svg")
    assert ACCENT not in (tmp_path / "loop_map.svg").read_text()


def test_svg_bytes_stable(tmp_path):
    cfg = config({"kind": "simulate-ode", "v0": 0.01}, record_stride=20)
    run(RunConfig.from_dict(cfg), output_dir=str(tmp_path / "a"))
    run(RunConfig.from_dict(cfg), output_dir=str(tmp_path / "b"))
    a = (tmp_path / "a" / "trajectory_phase.svg").read_bytes()
    assert a == (tmp_path / "b" / "trajectory_phase.svg").read_bytes()
    assert b"<dc:date>" not in a


def test_shipped_configs_parse():
    import pathlib

    paths = sorted((pathlib.Path(__file__).parents[1] / "configs").glob("*.json"))
    assert paths
    for p in paths:
        cfg = RunConfig.load(str(p))
        assert cfg.params.phi0 < 0
