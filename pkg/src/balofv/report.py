"""Experiment reports: named metrics with explicit thresholds.

A report serializes deterministically (no timestamps, no absolute paths) so
that re-running an experiment from the same config yields byte-identical
output. One metric per line: name, value, threshold, PASS|FAIL. Threshold
grammar: ``>=X``, ``<=X``, ``[A,B]`` (inclusive band), ``==X@T`` (match X to
absolute tolerance T) and ``none`` for purely informational values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from ._version import __version__

_HEADER = "# balo-fv report"


def check_threshold(value: float, spec: str) -> bool:
    if spec == "none":
        return True
    if math.isnan(value):
        return False
    if spec.startswith(">="):
        return value >= float(spec[2:])
    if spec.startswith("<="):
        return value <= float(spec[2:])
    if spec.startswith("[") and spec.endswith("]"):
        lo, hi = (float(p) for p in spec[1:-1].split(","))
        return lo <= value <= hi
    if spec.startswith("==") and "@" in spec:
        target, tol = spec[2:].split("@")
        return abs(value - float(target)) <= float(tol)
    raise ConfigError(f"unknown threshold spec {spec!r}")


@dataclass(frozen=True)
class Metric:
    name: str
    value: float
    threshold: str
    passed: bool


@dataclass
class ExperimentReport:
    experiment: str
    config_digest: str
    code_version: str = __version__
    metrics: list[Metric] = field(default_factory=list)
    snapshots: list[str] = field(default_factory=list)

    def add(self, name: str, value: float, threshold: str = "none") -> Metric:
        m = Metric(name, float(value), threshold, check_threshold(float(value), threshold))
        self.metrics.append(m)
        return m

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics)

    def metric(self, name: str) -> Metric:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [
            _HEADER,
            f"experiment={self.experiment}",
            f"config_digest={self.config_digest}",
            f"code_version={self.code_version}",
            "metrics:",
        ]
        for m in self.metrics:
            status = "PASS" if m.passed else "FAIL"
            lines.append(f"{m.name},{format(m.value, '.17g')},{m.threshold},{status}")
        lines.append("snapshots:")
        lines.extend(self.snapshots)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentReport":
        lines = text.splitlines()
        if not lines or lines[0] != _HEADER:
            raise ConfigError("not a balo-fv report")
        fields = {}
        i = 1
        while i < len(lines) and "=" in lines[i]:
            key, _, val = lines[i].partition("=")
            fields[key] = val
            i += 1
        if i >= len(lines) or lines[i] != "metrics:":
            raise ConfigError("report is missing the metrics section")
        rep = cls(
            experiment=fields.get("experiment", ""),
            config_digest=fields.get("config_digest", ""),
            code_version=fields.get("code_version", ""),
        )
        i += 1
        while i < len(lines) and lines[i] != "snapshots:":
            parts = lines[i].split(",")
            if len(parts) < 4:
                raise ConfigError(f"malformed metric line: {lines[i]!r}")
            name, value = parts[0], float(parts[1])
            status = parts[-1]
            threshold = ",".join(parts[2:-1])
            rep.metrics.append(Metric(name, value, threshold, status == "PASS"))
            i += 1
        rep.snapshots = [ln for ln in lines[i + 1 :] if ln]
        return rep

    def write(self, path: str | Path) -> None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.to_text())

    @classmethod
    def read(cls, path: str | Path) -> "ExperimentReport":
        return cls.from_text(Path(path).read_text())
