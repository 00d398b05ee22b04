"""Radial damage profile: the ring-indicator replication for 2D snapshots."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .snapshots import SchemaError, Snapshot, read_snapshot  # noqa: E402


def radial_profile(snap: Snapshot, field: str = "d") -> tuple[np.ndarray, np.ndarray]:
    """Annulus averages about the domain center, bin width = one cell."""
    if not snap.is_2d:
        raise SchemaError(f"{snap.path}: radial profile needs a 2D snapshot")
    data = snap.field(field)
    cx = 0.5 * (snap.x[0] + snap.x[-1])
    cy = 0.5 * (snap.y[0] + snap.y[-1])
    dx = snap.x[1] - snap.x[0]
    dy = snap.y[1] - snap.y[0]
    rr = np.sqrt((snap.x[None, :] - cx) ** 2 + (snap.y[:, None] - cy) ** 2)
    dr = max(dx, dy)
    half_extent = 0.5 * min(snap.x[-1] - snap.x[0] + dx, snap.y[-1] - snap.y[0] + dy)
    nbins = int(half_extent / dr)
    idx = (rr / dr).astype(int)
    mask = idx < nbins
    counts = np.bincount(idx[mask], minlength=nbins)
    sums = np.bincount(idx[mask], weights=data[mask], minlength=nbins)
    prof = np.divide(sums, counts, out=np.zeros(nbins), where=counts > 0)
    return (np.arange(nbins) + 0.5) * dr, prof


def render_radial(snapshot_path: str | Path, out_path: str | Path, field: str = "d") -> Path:
    snap = read_snapshot(snapshot_path)
    r, prof = radial_profile(snap, field)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(r, prof, "-")
    ax.set_xlabel("radius")
    ax.set_ylabel(f"radial average of {field}")
    ax.set_title(f"t={snap.t:g}")
    if field == "d":
        ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="balofv-radial", description="Radial profile plot of a 2D snapshot"
    )
    parser.add_argument("snapshot")
    parser.add_argument("out")
    parser.add_argument("--field", default="d", choices=("m", "c", "d"))
    args = parser.parse_args(argv)
    try:
        render_radial(args.snapshot, args.out, field=args.field)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
