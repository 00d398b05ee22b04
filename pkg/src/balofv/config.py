"""Run configuration: strict parsing, validation, and reproducible echo.

Config files are flat YAML with a single nested ``params`` block. Unknown
keys are a hard error (a typo must never silently fall back to a default).
``config_echo`` renders every effective value, defaults included, as a valid
config file; re-running from the echo reproduces a run byte for byte, and its
SHA-256 digest identifies the run in reports.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError
from .grid import Grid, InitPreset, State, allocate_state
from .model import DiffusionMode, ModelParams
from ._version import __version__

SNAPSHOT_FRACTIONS = (0.25, 0.5, 0.75, 1.0)

_TOP_KEYS = {
    "dimension", "nx", "ny", "lx", "ly", "t_end", "cfl", "theta_limiter",
    "snapshot_times", "snapshot_every", "init_preset", "amplitude",
    "sigma_fraction", "center", "init_file", "output_dir", "experiment",
    "enforce_gamma_condition", "params",
}
_PARAM_KEYS = {
    "gamma", "chi", "mu", "delta", "tau", "alpha", "lambda", "beta", "r",
    "epsilon", "diffusion_mode",
}
_PRESETS = ("zero", "gauss-bump", "custom-file")


@dataclass(frozen=True)
class RunConfig:
    """Full experiment description; every field has its effective value."""

    dimension: int
    nx: int
    lx: float
    t_end: float
    ny: int = 1
    ly: float = 0.0
    cfl: float = 0.25
    theta_limiter: float = 1.5
    snapshot_times: tuple[float, ...] = ()
    init_preset: str = "gauss-bump"
    amplitude: float = 1.0
    sigma_fraction: float = 0.05
    center: tuple[float, float] = (0.5, 0.5)
    init_file: Optional[str] = None
    output_dir: str = "out"
    experiment: Optional[str] = None
    enforce_gamma_condition: bool = False
    params: ModelParams = ModelParams()


def _key_lines(text: str) -> dict[str, int]:
    """Map config keys (params.* for the nested block) to 1-based line numbers."""
    lines: dict[str, int] = {}
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if not isinstance(node, yaml.MappingNode):
        return lines
    for k, v in node.value:
        lines[str(k.value)] = k.start_mark.line + 1
        if str(k.value) == "params" and isinstance(v, yaml.MappingNode):
            for pk, _ in v.value:
                lines[f"params.{pk.value}"] = pk.start_mark.line + 1
    return lines


class _Reader:
    def __init__(self, data: dict, lines: dict[str, int], prefix: str = ""):
        self.data = data
        self.lines = lines
        self.prefix = prefix

    def _where(self, key: str) -> str:
        full = self.prefix + key
        line = self.lines.get(full)
        return f"{full!r} (line {line})" if line else repr(full)

    def check_unknown(self, allowed: set) -> None:
        unknown = set(self.data) - allowed
        if unknown:
            key = min(unknown, key=lambda k: self.lines.get(self.prefix + str(k), 10**9))
            raise ConfigError(f"unknown config key {self._where(str(key))}")

    def get(self, key: str, kind: type, default: Any = None, required: bool = False) -> Any:
        if key not in self.data:
            if required:
                raise ConfigError(f"missing required config key {self.prefix + key!r}")
            return default
        val = self.data[key]
        if kind is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if kind is int and isinstance(val, bool):
            raise ConfigError(f"key {self._where(key)} must be an integer")
        if not isinstance(val, kind):
            raise ConfigError(
                f"key {self._where(key)} must be of type {kind.__name__}, got {val!r}"
            )
        return val


def _float_list(reader: _Reader, key: str) -> Optional[tuple[float, ...]]:
    if key not in reader.data:
        return None
    val = reader.data[key]
    if not isinstance(val, list) or not val:
        raise ConfigError(f"key {reader._where(key)} must be a non-empty list of numbers")
    out = []
    for entry in val:
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise ConfigError(f"key {reader._where(key)} must contain only numbers")
        out.append(float(entry))
    return tuple(out)


def _build_params(raw: Optional[dict], lines: dict[str, int]) -> ModelParams:
    if raw is None:
        return ModelParams()
    if not isinstance(raw, dict):
        raise ConfigError("config key 'params' must be a mapping")
    reader = _Reader(raw, lines, prefix="params.")
    reader.check_unknown(_PARAM_KEYS)
    mode_str = reader.get("diffusion_mode", str, default="porous")
    try:
        mode = DiffusionMode(mode_str)
    except ValueError:
        raise ConfigError(
            f"params.diffusion_mode must be one of "
            f"{[m.value for m in DiffusionMode]}, got {mode_str!r}"
        ) from None
    kwargs = {}
    for key in ("gamma", "chi", "mu", "delta", "tau", "alpha", "beta", "r", "epsilon"):
        if key in raw:
            kwargs[key] = reader.get(key, float)
    if "lambda" in raw:
        kwargs["lam"] = reader.get("lambda", float)
    return ModelParams(diffusion_mode=mode, **kwargs)


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: config must be a key-value mapping")
    lines = _key_lines(text)
    reader = _Reader(data, lines)
    reader.check_unknown(_TOP_KEYS)

    dimension = reader.get("dimension", int, required=True)
    nx = reader.get("nx", int, required=True)
    lx = reader.get("lx", float, required=True)
    t_end = reader.get("t_end", float, required=True)

    try:
        params = _build_params(data.get("params"), lines)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    enforce = reader.get("enforce_gamma_condition", bool, default=False)
    if enforce:
        if params.diffusion_mode is not DiffusionMode.POROUS:
            raise ConfigError(
                f"{source}: enforce_gamma_condition applies to porous-medium diffusion only"
            )
        if dimension in (1, 2, 3):  # the exponent condition is stated for n up to 3
            bound = params.gamma_condition_threshold(dimension)
            if not params.gamma > bound:
                raise ConfigError(
                    f"{source}: gamma={params.gamma:g} violates the claimed exponent "
                    f"condition gamma > max(2 - 2/n, 1) = {bound:g} for dimension {dimension}"
                )

    if dimension not in (1, 2):
        raise ConfigError(f"{source}: dimension must be 1 or 2, got {dimension}")
    if dimension == 1:
        for key in ("ny", "ly"):
            if key in data:
                raise ConfigError(f"{source}: key {key!r} is only valid for dimension=2")
        ny, ly = 1, 0.0
    else:
        ny = reader.get("ny", int, default=nx)
        ly = reader.get("ly", float, default=lx)

    cfl = reader.get("cfl", float, default=0.25)
    theta = reader.get("theta_limiter", float, default=1.5)
    if t_end <= 0.0:
        raise ConfigError(f"{source}: t_end must be positive, got {t_end}")
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"{source}: cfl must lie in (0, 1], got {cfl}")
    if not 0.0 <= theta <= 2.0:
        raise ConfigError(f"{source}: theta_limiter must lie in [0, 2], got {theta}")

    times = _float_list(reader, "snapshot_times")
    every = reader.get("snapshot_every", float)
    if times is not None and every is not None:
        raise ConfigError(f"{source}: snapshot_times and snapshot_every are mutually exclusive")
    if every is not None:
        if every <= 0.0:
            raise ConfigError(f"{source}: snapshot_every must be positive, got {every}")
        count = int(t_end / every + 1e-9)
        times = tuple(k * every for k in range(1, count + 1))
    if times is None:
        times = tuple(f * t_end for f in SNAPSHOT_FRACTIONS)
    if any(t <= 0.0 or t > t_end for t in times):
        raise ConfigError(f"{source}: snapshot_times must lie in (0, t_end]")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError(f"{source}: snapshot_times must be strictly increasing")

    preset = reader.get("init_preset", str, default="gauss-bump")
    if preset not in _PRESETS:
        raise ConfigError(f"{source}: init_preset must be one of {_PRESETS}, got {preset!r}")
    init_file = reader.get("init_file", str)
    if preset == "custom-file" and not init_file:
        raise ConfigError(f"{source}: init_preset=custom-file requires init_file")
    if preset != "custom-file" and init_file:
        raise ConfigError(f"{source}: init_file is only valid with init_preset=custom-file")

    amplitude = reader.get("amplitude", float, default=1.0)
    sigma_fraction = reader.get("sigma_fraction", float, default=0.05)
    if amplitude < 0.0:
        raise ConfigError(f"{source}: amplitude must be nonnegative, got {amplitude}")
    if sigma_fraction <= 0.0:
        raise ConfigError(f"{source}: sigma_fraction must be positive, got {sigma_fraction}")

    center_raw = data.get("center", 0.5)
    if isinstance(center_raw, (int, float)) and not isinstance(center_raw, bool):
        center = (float(center_raw), float(center_raw))
    elif isinstance(center_raw, list) and len(center_raw) == 2:
        center = (float(center_raw[0]), float(center_raw[1]))
    else:
        raise ConfigError(f"{source}: center must be a number or a pair, got {center_raw!r}")
    if not all(0.0 <= f <= 1.0 for f in center):
        raise ConfigError(f"{source}: center fractions must lie in [0, 1], got {center}")

    cfg = RunConfig(
        dimension=dimension,
        nx=nx,
        lx=lx,
        t_end=t_end,
        ny=ny,
        ly=ly,
        cfl=cfl,
        theta_limiter=theta,
        snapshot_times=times,
        init_preset=preset,
        amplitude=amplitude,
        sigma_fraction=sigma_fraction,
        center=center,
        init_file=init_file,
        output_dir=reader.get("output_dir", str, default="out"),
        experiment=reader.get("experiment", str),
        enforce_gamma_condition=enforce,
        params=params,
    )
    grid_from_config(cfg)  # surfaces grid-size problems at parse time
    return cfg


def parse_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config_text(text, source=str(p))


def grid_from_config(cfg: RunConfig) -> Grid:
    if cfg.dimension == 1:
        return Grid.line(cfg.nx, cfg.lx)
    return Grid.box(cfg.nx, cfg.ny, cfg.lx, cfg.ly)


def initial_state(cfg: RunConfig, grid: Grid) -> State:
    preset = InitPreset(
        name=cfg.init_preset,
        amplitude=cfg.amplitude,
        sigma_fraction=cfg.sigma_fraction,
        center=cfg.center,
        file=cfg.init_file,
    )
    return allocate_state(grid, preset)


def config_to_dict(cfg: RunConfig) -> dict:
    """Effective config as an ordered mapping; a valid config document."""
    out: dict[str, Any] = {
        "dimension": cfg.dimension,
        "nx": cfg.nx,
        "lx": cfg.lx,
        "t_end": cfg.t_end,
    }
    if cfg.dimension == 2:
        out["ny"] = cfg.ny
        out["ly"] = cfg.ly
    out["cfl"] = cfg.cfl
    out["theta_limiter"] = cfg.theta_limiter
    out["snapshot_times"] = list(cfg.snapshot_times)
    out["init_preset"] = cfg.init_preset
    out["amplitude"] = cfg.amplitude
    out["sigma_fraction"] = cfg.sigma_fraction
    out["center"] = list(cfg.center)
    if cfg.init_file is not None:
        out["init_file"] = cfg.init_file
    out["output_dir"] = cfg.output_dir
    if cfg.experiment is not None:
        out["experiment"] = cfg.experiment
    out["enforce_gamma_condition"] = cfg.enforce_gamma_condition
    out["params"] = {
        "gamma": cfg.params.gamma,
        "chi": cfg.params.chi,
        "mu": cfg.params.mu,
        "delta": cfg.params.delta,
        "tau": cfg.params.tau,
        "alpha": cfg.params.alpha,
        "lambda": cfg.params.lam,
        "beta": cfg.params.beta,
        "r": cfg.params.r,
        "epsilon": cfg.params.epsilon,
        "diffusion_mode": cfg.params.diffusion_mode.value,
    }
    return out


def config_echo(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)


def config_digest(cfg: RunConfig) -> str:
    return hashlib.sha256(config_echo(cfg).encode()).hexdigest()


def snapshot_meta(cfg: RunConfig, t: float) -> str:
    return (
        f"# balo-fv {__version__} snapshot metadata (t = {format(t, '.17g')})\n"
        f"# full config echo; this file is itself a runnable config\n"
        + config_echo(cfg)
    )


def with_params(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, params=replace(cfg.params, **changes))
