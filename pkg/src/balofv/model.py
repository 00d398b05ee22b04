"""Model parameters and constitutive laws of the plaque-formation system.

Three coupled fields: activated macrophages m, pro-inflammatory cytokines c,
and damaged oligodendrocytes d. Macrophages move by density-dependent
diffusion (linear or porous-medium) and chemotaxis up the cytokine gradient
with a saturated sensitivity; cytokines diffuse, decay and are produced by m
and d; damage accumulates locally and irreversibly, capped at d = 1.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DomainError

# Vacuum guard for the logarithmic enthalpy of the linear-diffusion mode.
LOG_ENTHALPY_FLOOR = 1e-12

# Slack on the d <= 1 precondition before damage_rate treats it as a breach.
DAMAGE_D_TOL = 1e-9


class DiffusionMode(Enum):
    LINEAR = "linear"
    POROUS = "porous"


@dataclass(frozen=True)
class ModelParams:
    """Physical and constitutive constants of the system.

    gamma   porous-medium exponent (> 0); diffusivity is gamma*m^(gamma-1)
    chi     chemotactic sensitivity (>= 0)
    mu      logistic growth rate (>= 0; 0 switches the source off)
    delta   saturation constant of the sensitivity 1/(1 + delta*m)
    tau, alpha, lam, beta, r   coefficients of the c and d equations
    epsilon additive regularization shift, D_eps(s) = D(s + epsilon)
    """

    gamma: float = 2.0
    chi: float = 4.0
    mu: float = 1.0
    delta: float = 1.0
    tau: float = 1.0
    alpha: float = 1.0
    lam: float = 1.0
    beta: float = 1.0
    r: float = 1.0
    epsilon: float = 0.0
    diffusion_mode: DiffusionMode = DiffusionMode.POROUS

    def __post_init__(self) -> None:
        checks = [
            ("gamma", self.gamma > 0.0),
            ("chi", self.chi >= 0.0),
            ("mu", self.mu >= 0.0),
            ("delta", self.delta >= 0.0),
            ("tau", self.tau > 0.0),
            ("alpha", self.alpha > 0.0),
            ("lam", self.lam >= 0.0),
            ("beta", self.beta >= 0.0),
            ("r", self.r >= 0.0),
            ("epsilon", 0.0 <= self.epsilon < 1.0),
        ]
        for name, ok in checks:
            value = getattr(self, name)
            if not (ok and math.isfinite(value)):
                raise ConfigError(f"invalid model parameter {name}={value!r}")
        if self.diffusion_mode is DiffusionMode.POROUS and self.gamma == 1.0:
            raise ConfigError(
                "porous-medium mode with gamma=1 is the linear-diffusion limit; "
                "select diffusion_mode=linear instead"
            )

    def gamma_condition_threshold(self, dim: int) -> float:
        """Exponent bound max(2 - 2/n, 1) below which the run may not claim compliance."""
        return max(2.0 - 2.0 / dim, 1.0)


def _require_nonnegative(m, what: str = "m") -> None:
    if np.any(np.asarray(m) < 0.0):
        raise DomainError(f"{what} must be nonnegative")


def diffusion_enthalpy(m, params: ModelParams, eta_floor: float = LOG_ENTHALPY_FLOOR):
    """Enthalpy H(m) whose interface difference -(H_R - H_L)/dx is the diffusive velocity.

    Porous-medium mode: (gamma/(gamma-1)) * (m + epsilon)^(gamma-1).
    Linear mode: log(m + epsilon + eta_floor), the gamma -> 1 limit up to a
    constant; eta_floor keeps the log finite at vacuum.
    """
    _require_nonnegative(m)
    if params.diffusion_mode is DiffusionMode.LINEAR:
        return np.log(m + params.epsilon + eta_floor)
    g = params.gamma
    shifted = m + params.epsilon
    coef = g / (g - 1.0)
    e = g - 1.0
    if e == 1.0:  # quadratic diffusion, skip the pow
        return coef * shifted
    if e == 2.0:
        return coef * shifted * shifted
    return coef * shifted**e


def diffusivity(m, params: ModelParams):
    """Regularized diffusivity D_eps(m) = D(m + epsilon)."""
    _require_nonnegative(m)
    if params.diffusion_mode is DiffusionMode.LINEAR:
        return np.ones_like(np.asarray(m, dtype=float))
    g = params.gamma
    shifted = m + params.epsilon
    e = g - 1.0
    if e == 1.0:
        return g * shifted
    if e == 2.0:
        return g * shifted * shifted
    return g * shifted**e


def diffusion_primitive(m, params: ModelParams):
    """Primitive of the regularized diffusivity, vanishing at m = 0.

    Porous-medium mode: (m + epsilon)^gamma - epsilon^gamma. Linear mode: m.
    """
    _require_nonnegative(m)
    if params.diffusion_mode is DiffusionMode.LINEAR:
        return m + np.zeros_like(np.asarray(m, dtype=float))
    g = params.gamma
    return (m + params.epsilon) ** g - params.epsilon**g


def chemo_sensitivity(m, params: ModelParams):
    """Saturated sensitivity 1/(1 + delta*m) multiplying chi * grad(c)."""
    _require_nonnegative(m)
    return 1.0 / (1.0 + params.delta * m)


def reaction_m(m, params: ModelParams):
    """Logistic macrophage source mu * m * (1 - m)."""
    _require_nonnegative(m)
    return params.mu * m * (1.0 - m)


def reaction_c(m, c, d, params: ModelParams):
    """Cytokine reaction (lam*d - c + beta*m) / tau."""
    return (params.lam * d - c + params.beta * m) / params.tau


def damage_rate(m, d, params: ModelParams):
    """Oligodendrocyte damage rate r * m * (m/(1 + delta*m)) * (1 - d)."""
    _require_nonnegative(m)
    if np.any(np.asarray(d) > 1.0 + DAMAGE_D_TOL):
        raise DomainError("d exceeds 1; upstream invariant breach")
    return params.r * m * (m / (1.0 + params.delta * m)) * (1.0 - d)
