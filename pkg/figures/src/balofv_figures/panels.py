"""Comparison-panel rendering.

A panel grid shows one field across the diffusion-mode / chemotaxis-strength
matrix of a figure experiment: 1D panels overlay the snapshot curves at their
emission times, 2D panels show a heatmap of the final snapshot. The damage
field d uses a fixed [0, 1] color scale so panels stay comparable.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .snapshots import Report, SchemaError, Snapshot, read_report, read_snapshot  # noqa: E402

_RUN_KEY = re.compile(r"^(linear|porous)_chi([0-9.e+-]+)$")


@dataclass(frozen=True)
class PanelEntry:
    title: str
    snapshots: tuple[str, ...]


@dataclass(frozen=True)
class PanelSpec:
    field: str
    rows: int
    cols: int
    panels: tuple[PanelEntry, ...]
    vmin: float = 0.0
    vmax: Optional[float] = 1.0


def _load_panel(entry: PanelEntry, field: str) -> list[Snapshot]:
    snaps = [read_snapshot(p) for p in entry.snapshots]
    if not snaps:
        raise SchemaError(f"panel {entry.title!r} has no snapshots")
    shape = snaps[0].field(field).shape
    for s in snaps[1:]:
        if s.field(field).shape != shape:
            raise SchemaError(
                f"panel {entry.title!r}: {s.path} has shape {s.field(field).shape}, "
                f"expected {shape}"
            )
    return snaps


def render_panels(spec: PanelSpec, out_path: str | Path) -> Path:
    """Render the panel grid to one PNG; deterministic for fixed inputs."""
    if len(spec.panels) > spec.rows * spec.cols:
        raise SchemaError(
            f"{len(spec.panels)} panels do not fit a {spec.rows}x{spec.cols} layout"
        )
    fig, axes = plt.subplots(
        spec.rows, spec.cols, figsize=(5.0 * spec.cols, 4.0 * spec.rows), squeeze=False
    )
    for ax in axes.flat:
        ax.set_axis_off()
    for k, entry in enumerate(spec.panels):
        ax = axes[k // spec.cols][k % spec.cols]
        ax.set_axis_on()
        snaps = _load_panel(entry, spec.field)
        if snaps[0].is_2d:
            final = snaps[-1]
            data = final.field(spec.field)
            im = ax.imshow(
                data,
                origin="lower",
                extent=(final.x[0], final.x[-1], final.y[0], final.y[-1]),
                vmin=spec.vmin,
                vmax=spec.vmax,
                cmap="viridis",
            )
            fig.colorbar(im, ax=ax, shrink=0.85)
            ax.set_xlabel("x")
            ax.set_ylabel("y")
            ax.set_title(f"{entry.title}  (t={final.t:g})")
        else:
            for s in snaps:
                ax.plot(s.x, s.field(spec.field), label=f"t={s.t:g}")
            ax.set_xlabel("x")
            ax.set_ylabel(spec.field)
            if spec.vmax is not None:
                ax.set_ylim(spec.vmin, spec.vmax * 1.05)
            ax.legend(fontsize=8)
            ax.set_title(entry.title)
    fig.tight_layout()
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def spec_from_report(report: Report | str | Path, field: str = "d") -> PanelSpec:
    """Build the mode x chi panel grid from a figure-experiment report.

    Snapshot manifest entries are grouped by their run directory
    (``<mode>_chi<value>/snap_XX.csv``); the chi = 0 contrast pair is left
    out. Rows are chi values ascending, columns linear then porous, matching
    the comparison layout (linear left, porous right).
    """
    rep = report if isinstance(report, Report) else read_report(report)
    base = Path(rep.path).parent
    groups: dict[tuple[float, str], list[str]] = {}
    for rel in rep.snapshots:
        parts = Path(rel).parts
        if len(parts) < 2:
            continue
        match = _RUN_KEY.match(parts[0])
        if not match:
            continue
        mode, chi = match.group(1), float(match.group(2))
        if chi == 0.0:
            continue
        groups.setdefault((chi, mode), []).append(str(base / rel))
    if not groups:
        raise SchemaError(f"{rep.path}: no <mode>_chi<value> snapshot groups in manifest")
    chis = sorted({chi for chi, _ in groups})
    modes = [m for m in ("linear", "porous") if any(k[1] == m for k in groups)]
    panels = []
    for chi in chis:
        for mode in modes:
            key = (chi, mode)
            if key not in groups:
                raise SchemaError(f"{rep.path}: missing run {mode}_chi{chi:g} in manifest")
            panels.append(
                PanelEntry(
                    title=f"{mode} diffusion, chi={chi:g}",
                    snapshots=tuple(sorted(groups[key])),
                )
            )
    vmax = 1.0 if field == "d" else None
    return PanelSpec(
        field=field, rows=len(chis), cols=len(modes), panels=tuple(panels), vmax=vmax
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="balofv-panels",
        description="Render comparison panels from a figure-experiment report",
    )
    parser.add_argument("report", help="report.txt of a figures run")
    parser.add_argument("out", help="output PNG path")
    parser.add_argument("--field", default="d", choices=("m", "c", "d"))
    args = parser.parse_args(argv)
    try:
        spec = spec_from_report(args.report, field=args.field)
        render_panels(spec, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
