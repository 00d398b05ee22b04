"""Uniform cell-centered 1D/2D meshes with ghost layers and field storage.

Arrays are stored ghost-inclusive. In 2D the layout is row-major with the
y index j on axis 0 and the x index i on axis 1, so a field has shape
(ny + 2*ghost, nx + 2*ghost). Ghost width is 2: the second-order
reconstruction needs two neighbors on each side of the first interior cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from . import fileio

GHOST = 2


@dataclass(frozen=True)
class Grid:
    dim: int
    nx: int
    ny: int
    lx: float
    ly: float
    dx: float
    dy: float
    ghost: int = GHOST

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.nx < 4 or self.dx <= 0.0:
            raise ConfigError(f"need nx >= 4 and dx > 0, got nx={self.nx}, dx={self.dx}")
        if self.dim == 2 and (self.ny < 4 or self.dy <= 0.0):
            raise ConfigError(f"need ny >= 4 and dy > 0, got ny={self.ny}, dy={self.dy}")

    @classmethod
    def line(cls, nx: int, lx: float) -> "Grid":
        return cls(dim=1, nx=nx, ny=1, lx=lx, ly=0.0, dx=lx / nx, dy=0.0)

    @classmethod
    def box(cls, nx: int, ny: int, lx: float, ly: float) -> "Grid":
        return cls(dim=2, nx=nx, ny=ny, lx=lx, ly=ly, dx=lx / nx, dy=ly / ny)

    @property
    def shape(self) -> tuple[int, ...]:
        g2 = 2 * self.ghost
        if self.dim == 1:
            return (self.nx + g2,)
        return (self.ny + g2, self.nx + g2)

    @property
    def interior(self) -> tuple[slice, ...]:
        s = slice(self.ghost, -self.ghost)
        return (s,) if self.dim == 1 else (s, s)

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy

    @property
    def measure(self) -> float:
        """Measure of the computational domain."""
        return self.lx if self.dim == 1 else self.lx * self.ly

    def centers_x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def centers_y(self) -> np.ndarray:
        if self.dim == 1:
            return np.zeros(1)
        return (np.arange(self.ny) + 0.5) * self.dy


@dataclass
class State:
    """Cell-averaged fields (ghost-inclusive arrays) at one time instant."""

    m: np.ndarray
    c: np.ndarray
    d: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.m.copy(), self.c.copy(), self.d.copy(), self.t)

    def fields(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.m, self.c, self.d


@dataclass(frozen=True)
class InitPreset:
    """Named initial-data preset; center is in domain fractions."""

    name: str = "gauss-bump"
    amplitude: float = 1.0
    sigma_fraction: float = 0.05
    center: tuple[float, ...] = (0.5, 0.5)
    file: str | None = None


def check_shape(fld: np.ndarray, grid: Grid, what: str = "field") -> None:
    if fld.shape != grid.shape:
        raise DomainError(f"{what} has shape {fld.shape}, grid expects {grid.shape}")


def _mirror_x(a: np.ndarray, g: int) -> None:
    if a.ndim == 1:
        a[:g] = a[2 * g - 1 : g - 1 : -1]
        a[-g:] = a[-g - 1 : -2 * g - 1 : -1]
    else:
        a[:, :g] = a[:, 2 * g - 1 : g - 1 : -1]
        a[:, -g:] = a[:, -g - 1 : -2 * g - 1 : -1]


def _mirror_y(a: np.ndarray, g: int) -> None:
    a[:g, :] = a[2 * g - 1 : g - 1 : -1, :]
    a[-g:, :] = a[-g - 1 : -2 * g - 1 : -1, :]


def fill_ghost_neumann(state: State, grid: Grid) -> State:
    """Mirror interior cells into the ghost layers (homogeneous Neumann).

    The k-th ghost layer copies the k-th interior cell, for all three fields.
    In 2D the x pass runs first, then the y pass, so corner ghosts end up as
    diagonal interior mirrors. Fills in place and returns the same state.
    """
    for fld in state.fields():
        check_shape(fld, grid)
        _mirror_x(fld, grid.ghost)
        if grid.dim == 2:
            _mirror_y(fld, grid.ghost)
    return state


def integrate_field(fld: np.ndarray, grid: Grid) -> float:
    """Sum of field * cell_volume over interior cells (discrete L1 for fld >= 0)."""
    check_shape(fld, grid)
    return float(np.sum(fld[grid.interior]) * grid.cell_volume)


def linf_norm(fld: np.ndarray, grid: Grid) -> float:
    check_shape(fld, grid)
    return float(np.max(np.abs(fld[grid.interior])))


def _gauss_bump(grid: Grid, preset: InitPreset) -> np.ndarray:
    sigma = preset.sigma_fraction * grid.lx
    if sigma <= 0.0:
        raise ConfigError(f"gauss-bump needs sigma_fraction > 0, got {preset.sigma_fraction}")
    cx = preset.center[0] * grid.lx
    x = grid.centers_x()
    if grid.dim == 1:
        r2 = (x - cx) ** 2
    else:
        cy = preset.center[1] * grid.ly
        y = grid.centers_y()
        r2 = (x[None, :] - cx) ** 2 + (y[:, None] - cy) ** 2
    return preset.amplitude * np.exp(-r2 / (2.0 * sigma**2))


def allocate_state(grid: Grid, init: InitPreset) -> State:
    """Build the initial state from a preset, ghost-filled, at t = 0.

    Presets: "zero" (all fields zero), "gauss-bump" (Gaussian m, c = d = 0),
    "custom-file" (interior fields from a snapshot CSV; the file's time
    stamp is discarded). Initial data must satisfy m >= 0, c >= 0 and
    0 <= d <= 1.
    """
    zeros = np.zeros(grid.shape)
    if init.name == "zero":
        state = State(zeros.copy(), zeros.copy(), zeros.copy())
    elif init.name == "gauss-bump":
        m = zeros.copy()
        m[grid.interior] = _gauss_bump(grid, init)
        state = State(m, zeros.copy(), zeros.copy())
    elif init.name == "custom-file":
        if not init.file:
            raise ConfigError("custom-file preset needs init_file")
        snap = fileio.read_snapshot(init.file)
        state = State(zeros.copy(), zeros.copy(), zeros.copy())
        for name, fld in (("m", snap.m), ("c", snap.c), ("d", snap.d)):
            interior_shape = (grid.nx,) if grid.dim == 1 else (grid.ny, grid.nx)
            if fld.shape != interior_shape:
                raise ConfigError(
                    f"init_file field {name} has shape {fld.shape}, grid expects {interior_shape}"
                )
            getattr(state, name)[grid.interior] = fld
    else:
        raise ConfigError(f"unknown init preset {init.name!r}")

    if np.any(state.m[grid.interior] < 0.0) or np.any(state.c[grid.interior] < 0.0):
        raise ConfigError("initial m and c must be nonnegative")
    di = state.d[grid.interior]
    if np.any(di < 0.0) or np.any(di > 1.0):
        raise ConfigError("initial d must lie in [0, 1]")
    return fill_ghost_neumann(state, grid)
