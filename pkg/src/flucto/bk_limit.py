"""When does the autonomous pair reproduce the classic unit exponential average?

Two quantitative diagnostics: the deviation |<exp(-beta1 W)> - 1| of each
preparation family across a mass-ratio grid, and a sensitivity norm measuring
how much the agent's initial trajectory data depend on the receiver's final
ones.  The sensitivity is the spectral norm of the inverse-flow Jacobian
block d(x2_0, v2_0)/d(x1_t, v1_t) taken in position-velocity coordinates:
momentum coordinates would hide the limit, because an arbitrarily heavy agent
still absorbs order-one momentum while its trajectory stays unperturbed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import ft_classical, ft_quantum
from .model import ModelParams, _flow_matrix
from .states_classical import (
    ClassicalMomentumCorrelated,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
)
from .states_quantum import states_from_params

__all__ = [
    "BkScanReport",
    "FAMILIES",
    "bk_deviation",
    "agent_backmap_sensitivity",
    "bk_scan",
]

FAMILIES = (
    "classical_tg",
    "classical_tt",
    "classical_corr",
    "quantum_tg",
    "quantum_tt",
    "quantum_mom_corr",
    "quantum_superpos",
    "quantum_entangled",
    "quantum_pos_corr",
)


@dataclass(frozen=True)
class BkScanReport:
    """Deviations from unity and backmap sensitivities over a mass-ratio grid."""

    family: str
    ratios: np.ndarray
    deviations: np.ndarray
    sensitivities: np.ndarray
    valid: np.ndarray


def bk_deviation(state, params: ModelParams) -> float:
    """|<exp(-beta1 W)> - 1| from the matching closed form; inf when divergent."""
    if isinstance(
        state, (ClassicalThermalGaussian, ClassicalThermalThermal, ClassicalMomentumCorrelated)
    ):
        prediction = ft_classical(state, params)
    else:
        prediction = ft_quantum(state, params)
    if not prediction.valid:
        return math.inf
    return abs(prediction.value - 1.0)


def agent_backmap_sensitivity(t: float, params: ModelParams,
                              spring_k: float | None = None) -> float:
    """Norm of d(agent initial position, velocity)/d(receiver final position, velocity).

    Computed from the exact linear backward flow.  Vanishes for free particles
    and decays proportionally to m1/m2 for a heavy agent; spring_k overrides
    the model's spring constant (zero is allowed here, unlike in ModelParams,
    precisely to expose the free limit).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    k = params.k if spring_k is None else spring_k
    if k < 0:
        raise ValueError("spring_k must be >= 0")
    back = _flow_matrix(-t, params.m1, params.m2, k)
    m1, m2 = params.m1, params.m2
    block = np.array(
        [
            [back[2, 0], m1 * back[2, 1]],
            [back[3, 0] / m2, (m1 / m2) * back[3, 1]],
        ]
    )
    return float(np.linalg.norm(block, 2))


def _family_state(family: str, params: ModelParams, kwargs: dict):
    if family == "classical_tg":
        return ClassicalThermalGaussian.from_params(params, **kwargs)
    if family == "classical_tt":
        return ClassicalThermalThermal.from_params(params, **kwargs)
    if family == "classical_corr":
        return ClassicalMomentumCorrelated.from_params(params, **kwargs)
    if family.startswith("quantum_"):
        return states_from_params(params, family.removeprefix("quantum_"), **kwargs)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def bk_scan(family: str, ratios, params: ModelParams, **state_kwargs) -> BkScanReport:
    """Deviation and sensitivity along a mass-ratio grid r = m1/m2 in (0, 1).

    The agent mass is held at params.m2 while m1 = r*m2 varies; widths in
    state_kwargs are held fixed across the grid.  Sensitivities are evaluated
    at t = tau of each ratio's model.
    """
    ratios = np.asarray(ratios, dtype=float)
    if np.any(ratios <= 0) or np.any(ratios >= 1):
        raise ValueError("mass ratios must lie in (0, 1)")
    deviations = np.empty_like(ratios)
    sensitivities = np.empty_like(ratios)
    valid = np.empty(ratios.shape, dtype=bool)
    for i, r in enumerate(ratios):
        scaled = ModelParams(
            m1=r * params.m2, m2=params.m2, k=params.k,
            beta1=params.beta1, hbar=params.hbar,
        )
        state = _family_state(family, scaled, dict(state_kwargs))
        deviations[i] = bk_deviation(state, scaled)
        sensitivities[i] = agent_backmap_sensitivity(scaled.tau, scaled)
        valid[i] = math.isfinite(deviations[i])
    return BkScanReport(family, ratios, deviations, sensitivities, valid)
