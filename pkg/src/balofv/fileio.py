"""Bit-stable snapshot output and parsing.

Snapshot schema: columnar text, header ``t,i,j,x,y,m,c,d``, one row per
interior cell in row-major order (j outer, i inner), every float rendered
with 17 significant digits so that re-reading reproduces the arrays exactly.
1D snapshots write j = 0 and y = 0. Each snapshot gets a companion
``<stem>.meta.yaml`` carrying the caller-supplied metadata text (config echo
plus code version).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

SNAPSHOT_HEADER = "t,i,j,x,y,m,c,d"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def meta_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".meta.yaml")


def write_snapshot(state, grid, meta: str, path: str | Path) -> None:
    """Write one snapshot CSV plus its metadata companion.

    ``meta`` is written verbatim; callers render the config echo themselves.
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    xs = grid.centers_x()
    ys = grid.centers_y()
    interior = grid.interior
    m = state.m[interior]
    c = state.c[interior]
    d = state.d[interior]
    if grid.dim == 1:
        m, c, d = m[None, :], c[None, :], d[None, :]
    t_str = _fmt(state.t)
    lines = [SNAPSHOT_HEADER]
    for j in range(m.shape[0]):
        y_str = _fmt(ys[j] if grid.dim == 2 else 0.0)
        mj, cj, dj = m[j], c[j], d[j]
        for i in range(m.shape[1]):
            lines.append(
                f"{t_str},{i},{j},{_fmt(xs[i])},{y_str},{_fmt(mj[i])},{_fmt(cj[i])},{_fmt(dj[i])}"
            )
    p.write_text("\n".join(lines) + "\n")
    if meta:
        meta_path(p).write_text(meta)


@dataclass(frozen=True)
class Snapshot:
    """Parsed snapshot: interior field arrays, (ny, nx) in 2D, (nx,) in 1D."""

    t: float
    x: np.ndarray
    y: np.ndarray
    m: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def nx(self) -> int:
        return self.m.shape[-1]

    @property
    def ny(self) -> int:
        return 1 if self.m.ndim == 1 else self.m.shape[0]


def read_snapshot(path: str | Path) -> Snapshot:
    p = Path(path)
    try:
        raw = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read snapshot {p}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed snapshot {p}: {exc}") from exc
    header = p.read_text().splitlines()[0].strip()
    if header != SNAPSHOT_HEADER:
        raise ConfigError(f"snapshot {p} has header {header!r}, expected {SNAPSHOT_HEADER!r}")
    if raw.shape[1] != 8:
        raise ConfigError(f"snapshot {p} has {raw.shape[1]} columns, expected 8")
    i_col = raw[:, 1].astype(int)
    j_col = raw[:, 2].astype(int)
    nx = int(i_col.max()) + 1
    ny = int(j_col.max()) + 1
    if raw.shape[0] != nx * ny:
        raise ConfigError(f"snapshot {p} has {raw.shape[0]} rows for a {ny}x{nx} grid")
    expect_i = np.tile(np.arange(nx), ny)
    expect_j = np.repeat(np.arange(ny), nx)
    if not (np.array_equal(i_col, expect_i) and np.array_equal(j_col, expect_j)):
        raise ConfigError(f"snapshot {p} rows are not in row-major (j outer) order")
    t = float(raw[0, 0])
    x = raw[:nx, 3].copy()
    y = raw[::nx, 4].copy()
    m = raw[:, 5].copy()
    c = raw[:, 6].copy()
    d = raw[:, 7].copy()
    if ny > 1:
        m = m.reshape(ny, nx)
        c = c.reshape(ny, nx)
        d = d.reshape(ny, nx)
    return Snapshot(t=t, x=x, y=y, m=m, c=c, d=d)
