"""Plots derived from experiment reports: convergence orders, sweep distances.

The convergence plot fits a least-squares slope through the log-log error
points; for a clean study this reproduces the observed order recorded in the
report itself.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .snapshots import Report, SchemaError, read_report  # noqa: E402

_SPACE_DIFF = re.compile(r"^space_l1_diff_([mcd])_nx(\d+)$")
_TIME_DIFF = re.compile(r"^time_l1_diff_([mcd])_lvl(\d+)$")
_EPS_DIST = re.compile(r"^l1_dist_eps_([0-9.e+-]+)$")


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


def convergence_series(report: Report) -> dict[str, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Error sequences per field: space errors vs 1/nx, time errors vs 2^-level."""
    space: dict[str, list[tuple[float, float]]] = {}
    time: dict[str, list[tuple[float, float]]] = {}
    for m in report.metrics:
        if match := _SPACE_DIFF.match(m.name):
            space.setdefault(match.group(1), []).append((1.0 / int(match.group(2)), m.value))
        elif match := _TIME_DIFF.match(m.name):
            time.setdefault(match.group(1), []).append((0.5 ** int(match.group(2)), m.value))
    out: dict[str, dict[str, tuple[np.ndarray, np.ndarray]]] = {"space": {}, "time": {}}
    for kind, series in (("space", space), ("time", time)):
        for field, pts in series.items():
            pts.sort()
            xs = np.array([p[0] for p in pts])
            ys = np.array([p[1] for p in pts])
            if len(xs) >= 2 and np.all(ys > 0.0):
                out[kind][field] = (xs, ys)
    return out


def fitted_orders(report: Report) -> dict[str, dict[str, float]]:
    """Least-squares log-log slopes per field for both convergence studies."""
    series = convergence_series(report)
    return {
        kind: {field: fit_loglog_slope(xs, ys) for field, (xs, ys) in data.items()}
        for kind, data in series.items()
    }


def _plot_loglog(data, xlabel, title, out: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for field, (xs, ys) in sorted(data.items()):
        slope = fit_loglog_slope(xs, ys)
        ax.loglog(xs, ys, "o-", label=f"{field}: slope {slope:.2f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("L1 difference")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def render_report_plots(report_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render every plot the report's metrics support; returns written paths."""
    rep = read_report(report_path)
    if not rep.metrics:
        return []
    out = Path(out_dir)
    written: list[Path] = []

    series = convergence_series(rep)
    if series["space"]:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "convergence_space.png"
        _plot_loglog(series["space"], "cell size (relative)", "spatial self-convergence", path)
        written.append(path)
    if series["time"]:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "convergence_time.png"
        _plot_loglog(series["time"], "time step (relative)", "temporal self-convergence", path)
        written.append(path)

    eps_pts = []
    for m in rep.metrics:
        if match := _EPS_DIST.match(m.name):
            eps_pts.append((float(match.group(1)), m.value))
    if len(eps_pts) >= 2 and all(v > 0.0 for _, v in eps_pts):
        eps_pts.sort()
        out.mkdir(parents=True, exist_ok=True)
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        ax.loglog([p[0] for p in eps_pts], [p[1] for p in eps_pts], "s-")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("L1 distance to the epsilon = 0 run")
        ax.set_title("regularization sweep")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = out / "eps_distances.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7.0, 0.4 * len(rep.metrics) + 1.2))
    names = [m.name for m in rep.metrics]
    values = [m.value for m in rep.metrics]
    colors = ["tab:blue" if m.status == "PASS" else "tab:red" for m in rep.metrics]
    ax.barh(range(len(names)), values, color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_title(f"metrics: {rep.experiment}")
    fig.tight_layout()
    path = out / "metrics.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="balofv-report-plots", description="Render plots from an experiment report"
    )
    parser.add_argument("report")
    parser.add_argument("out_dir")
    args = parser.parse_args(argv)
    try:
        written = render_report_plots(args.report, args.out_dir)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
