"""SVG figures drawn from the CSV artifacts.

Each function reads one CSV and writes one SVG.  Output is byte-stable:
the SVG id salt is fixed and the date metadata dropped.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .model import GoodwinError, as_model

RC = {
    "svg.hashsalt": "goodwin-cycles",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.0,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.6),
    "path.simplify": False,
}

INK = "#1b1b1b"
ACCENT = "#b2182b"
GUIDE = "#4d4d4d"


class MissingArtifactError(GoodwinError, FileNotFoundError):
    """A CSV needed for a plot does not exist."""


class EmptyPlotError(GoodwinError, ValueError):
    """A CSV has a header but no data rows."""


def read_table(path, required=()):
    """Columns of a CSV as float arrays (non-numeric columns kept as strings)."""
    if not os.path.exists(path):
        raise MissingArtifactError(f"missing artifact: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise EmptyPlotError(f"no data rows in {path}")
    cols = {}
    for key in rows[0]:
        vals = [r[key] for r in rows]
        try:
            cols[key] = np.array([float(v) for v in vals])
        except ValueError:
            cols[key] = np.array(vals)
    missing = [k for k in required if k not in cols]
    if missing:
        raise EmptyPlotError(f"{path} lacks columns {missing}")
    return cols


def _thin(n, max_points=8000):
    """Indices that keep at most ``max_points`` samples, always including both ends."""
    if n <= max_points:
        return np.arange(n)
    idx = np.arange(0, n, int(math.ceil(n / max_points)))
    return idx if idx[-1] == n - 1 else np.append(idx, n - 1)


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def plot_period_table(csv_path, svg_path):
    """Period against level, with the return-time oracle as markers."""
    t = read_table(csv_path, ("v0", "t_formula"))
    with matplotlib.rc_context(RC):
        fig = Figure()
        ax = fig.add_subplot()
        ax.plot(t["v0"], t["t_formula"], color=INK, marker="o", ms=3, label="level integral")
        if "t_return" in t and np.any(np.isfinite(t["t_return"])):
            ax.plot(t["v0"], t["t_return"], ls="none", marker="x", ms=5, color=ACCENT,
                    label="return to ray")
        ax.set_xlabel("level $V_0$")
        ax.set_ylabel("period $T(V_0)$")
        ax.legend(loc="upper left")
        fig.tight_layout()
        return _save(fig, svg_path)


def _region_guides(ax, model, xlim, ylim):
    e = model.equilibria
    c = model.curves
    xs = np.linspace(max(xlim[0], 1e-6), xlim[1], 400)
    with np.errstate(all="ignore"):
        fy = np.asarray(c.f(xs), dtype=float)
    fy = np.where((fy > 0) & (fy < 1), fy, np.nan)
    ax.plot(xs, fy, color=GUIDE, lw=0.7, ls="-", label="$y=f(x)$")
    ax.axhline(e.y_tilde, color=GUIDE, lw=0.7, ls="--", label=r"$y=\tilde y$")
    ax.axvline(e.x_tilde, color=GUIDE, lw=0.7, ls=":", label=r"$x=\tilde x$")
    ax.plot(xs, e.theta_tilde * xs, color=GUIDE, lw=0.7, ls="-.", label=r"$y=\tilde\theta x$")
    ax.plot([e.x_tilde], [e.y_tilde], marker="+", color=ACCENT, ms=7, ls="none")
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)


def plot_phase(csv_path, svg_path, params):
    """Phase portrait ``(x, y)`` with the curves that bound the regions."""
    t = read_table(csv_path, ("x", "y"))
    model = as_model(params)
    k = _thin(len(t["x"]))
    x, y = t["x"][k], t["y"][k]
    pad_x = 0.05 * (x.max() - x.min() or 1.0)
    pad_y = 0.05 * (y.max() - y.min() or 0.1)
    xlim = (max(x.min() - pad_x, 0.0), x.max() + pad_x)
    ylim = (max(y.min() - pad_y, 0.0), min(y.max() + pad_y, 1.0))
    with matplotlib.rc_context(RC):
        fig = Figure()
        ax = fig.add_subplot()
        ax.plot(x, y, color=INK, lw=0.6)
        _region_guides(ax, model, xlim, ylim)
        ax.set_xlabel("wage share $x$")
        ax.set_ylabel("employment rate $y$")
        ax.legend(loc="lower right", ncol=2)
        fig.tight_layout()
        return _save(fig, svg_path)


def plot_output(csv_path, svg_path):
    """Output ``P_t`` on a log scale against time."""
    t = read_table(csv_path, ("t", "P"))
    with matplotlib.rc_context(RC):
        fig = Figure()
        ax = fig.add_subplot()
        k = _thin(len(t["t"]))
        ax.plot(t["t"][k], t["P"][k], color=INK, lw=0.7)
        ax.set_yscale("log")
        ax.set_xlabel("time $t$")
        ax.set_ylabel("output $P_t$")
        fig.tight_layout()
        return _save(fig, svg_path)


def plot_loop_map(csv_path, svg_path):
    """Loop map ``y0 -> E[y_S]`` with error bars, the diagonal and the fixed point."""
    from .montecarlo import LoopMapTable, NoSignChangeError, fixed_point

    t = read_table(csv_path, ("y0", "mean_yS", "se_yS"))
    table = LoopMapTable.from_csv(csv_path)
    try:
        fp = fixed_point(table)
    except NoSignChangeError:
        fp = None
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(5.0, 5.0))
        ax, dev = fig.subplots(2, 1, sharex=True, height_ratios=(3, 2))
        lo = float(np.nanmin([t["y0"].min(), np.nanmin(t["mean_yS"])]))
        hi = float(np.nanmax([t["y0"].max(), np.nanmax(t["mean_yS"])]))
        err = 3.0 * np.nan_to_num(t["se_yS"])
        ax.plot([lo, hi], [lo, hi], color=GUIDE, lw=0.7, ls="--", label="diagonal")
        ax.errorbar(t["y0"], t["mean_yS"], yerr=err, color=INK, marker="o", ms=3, capsize=2,
                    lw=0.8, label=r"$E[y_S]$ ($\pm 3$ s.e.)")
        dev.axhline(0.0, color=GUIDE, lw=0.7, ls="--")
        dev.errorbar(t["y0"], t["mean_yS"] - t["y0"], yerr=err, color=INK, marker="o", ms=3,
                     capsize=2, lw=0.8)
        if fp is not None and not fp.degenerate and math.isfinite(fp.y_star):
            ax.plot([fp.y_star], [fp.y_star], marker="D", color=ACCENT, ms=6, ls="none",
                    label=f"fixed point {fp.y_star:.3f}")
            dev.plot([fp.y_star], [0.0], marker="D", color=ACCENT, ms=6, ls="none")
        ax.set_ylabel("employment after one loop")
        ax.legend(loc="upper left")
        dev.set_xlabel("start $y_0$")
        dev.set_ylabel(r"$E[y_S] - y_0$")
        fig.tight_layout()
        return _save(fig, svg_path)


def render_plots(artifacts, out_dir, params):
    """Draw every figure whose source CSV is among ``artifacts`` (names relative to ``out_dir``)."""
    made = []
    names = set(artifacts)
    join = lambda n: os.path.join(out_dir, n)  # noqa: E731
    if "periods.csv" in names:
        made.append(plot_period_table(join("periods.csv"), join("period_vs_level.svg")))
    for src in ("trajectory.csv", "path.csv"):
        if src in names:
            stem = src.split(".")[0]
            made.append(plot_phase(join(src), join(f"{stem}_phase.svg"), params))
    if "path.csv" in names and np.any(np.isfinite(read_table(join("path.csv"), ("P",))["P"])):
        made.append(plot_output(join("path.csv"), join("path_output.svg")))
    if "loop_map.csv" in names:
        made.append(plot_loop_map(join("loop_map.csv"), join("loop_map.svg")))
    return [os.path.basename(m) for m in made]
