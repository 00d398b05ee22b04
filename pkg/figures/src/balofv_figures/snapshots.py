"""Parsers for the solver's snapshot CSV and report text formats."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

SNAPSHOT_HEADER = "t,i,j,x,y,m,c,d"
FIELD_COLUMNS = {"m": 5, "c": 6, "d": 7}


class SchemaError(ValueError):
    """A snapshot or report file does not match the documented schema."""


@dataclass(frozen=True)
class Snapshot:
    """One parsed snapshot: 1D fields have shape (nx,), 2D (ny, nx)."""

    path: str
    t: float
    x: np.ndarray
    y: np.ndarray
    m: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def field(self, name: str) -> np.ndarray:
        if name not in FIELD_COLUMNS:
            raise SchemaError(f"unknown field {name!r}, expected one of m, c, d")
        return getattr(self, name)

    @property
    def is_2d(self) -> bool:
        return self.m.ndim == 2


def read_snapshot(path: str | Path) -> Snapshot:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read snapshot {p}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != SNAPSHOT_HEADER:
        head = lines[0] if lines else ""
        raise SchemaError(f"{p}: bad header {head!r}, expected {SNAPSHOT_HEADER!r}")
    try:
        raw = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise SchemaError(f"{p}: malformed rows: {exc}") from exc
    if raw.shape[1] != 8:
        raise SchemaError(f"{p}: {raw.shape[1]} columns, expected 8")
    i_col = raw[:, 1].astype(int)
    j_col = raw[:, 2].astype(int)
    nx = int(i_col.max()) + 1
    ny = int(j_col.max()) + 1
    if raw.shape[0] != nx * ny or not (
        np.array_equal(i_col, np.tile(np.arange(nx), ny))
        and np.array_equal(j_col, np.repeat(np.arange(ny), nx))
    ):
        raise SchemaError(f"{p}: rows are not a row-major {ny}x{nx} grid")
    fields = {}
    for name, col in FIELD_COLUMNS.items():
        arr = raw[:, col].copy()
        fields[name] = arr.reshape(ny, nx) if ny > 1 else arr
    return Snapshot(
        path=str(p),
        t=float(raw[0, 0]),
        x=raw[:nx, 3].copy(),
        y=raw[::nx, 4].copy(),
        **fields,
    )


@dataclass(frozen=True)
class ReportMetric:
    name: str
    value: float
    threshold: str
    status: str


@dataclass(frozen=True)
class Report:
    path: str
    experiment: str
    metrics: tuple[ReportMetric, ...]
    snapshots: tuple[str, ...]

    def values(self, prefix: str) -> dict[str, float]:
        return {m.name: m.value for m in self.metrics if m.name.startswith(prefix)}

    def value(self, name: str) -> float:
        for m in self.metrics:
            if m.name == name:
                return m.value
        raise KeyError(name)

    def snapshot_paths(self) -> list[Path]:
        base = Path(self.path).parent
        return [base / rel for rel in self.snapshots]


def read_report(path: str | Path) -> Report:
    p = Path(path)
    lines = p.read_text().splitlines()
    if not lines or not lines[0].startswith("# balo-fv report"):
        raise SchemaError(f"{p}: not a balo-fv report")
    experiment = ""
    i = 1
    while i < len(lines) and "=" in lines[i]:
        key, _, val = lines[i].partition("=")
        if key == "experiment":
            experiment = val
        i += 1
    if i >= len(lines) or lines[i] != "metrics:":
        raise SchemaError(f"{p}: missing metrics section")
    i += 1
    metrics = []
    while i < len(lines) and lines[i] != "snapshots:":
        parts = lines[i].split(",")
        if len(parts) < 4:
            raise SchemaError(f"{p}: malformed metric line {lines[i]!r}")
        metrics.append(
            ReportMetric(parts[0], float(parts[1]), ",".join(parts[2:-1]), parts[-1])
        )
        i += 1
    snaps = tuple(ln for ln in lines[i + 1 :] if ln)
    return Report(path=str(p), experiment=experiment, metrics=tuple(metrics), snapshots=snaps)
