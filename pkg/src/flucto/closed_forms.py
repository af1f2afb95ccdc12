"""Closed-form exponential-average work relations for every preparation.

Each prediction carries the denominator discriminant ("disc"), a normalised
distance to the convergence boundary ("condition_margin"), and the named
intermediate quantities the formula is built from, so boundary scans can be
emitted without recomputation.  Divergence is data: predictions beyond the
convergence boundary come back with valid=False and value=inf rather than as
exceptions.

Three of the reduced expressions here differ from their most compact
textbook-style counterparts; each was re-derived from the defining Gaussian
integrals and is pinned against independent quadrature in the test suite:

* thermal-thermal: the agent temperature enters as -4*eps^2*m1^2*(d2/d1)^2
  inside the discriminant (it tightens convergence; a hot agent can make the
  average diverge for eps > 0);
* momentum-correlated: the quartic shift is 4*m1^2*(eps^4 + eps^2*(c^2 + m2/m1));
* superposition: the interference term is exp(-Om*eta^2/8)*cos(Theta) added to
  one, with the Gaussian factor multiplying the whole bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams
from .states_classical import (
    ClassicalMomentumCorrelated,
    ClassicalState,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
)
from .states_quantum import (
    AgentSuperposition,
    EntangledPair,
    MomentumCorrelated,
    PositionCorrelated,
    QuantumState,
    QuantumThermalGaussian,
    QuantumThermalThermal,
)

__all__ = [
    "FtPrediction",
    "DomainError",
    "RegimeUnavailable",
    "ft_classical",
    "ft_quantum",
    "ft_quantum_approx",
    "xi_surface",
    "backaction_factor",
    "attenuation_factor",
    "jensen_bound",
    "REGIMES",
]

REGIMES = ("eps_first_order", "eps_ll_gamma_ll_1", "eps_ll_1")


class DomainError(ValueError):
    """Arguments outside the mathematical domain of a formula."""


class RegimeUnavailable(ValueError):
    """No printed approximation exists for this state/regime combination."""


@dataclass(frozen=True)
class FtPrediction:
    """A closed-form value for <exp(-beta1*W)> plus convergence bookkeeping."""

    value: float
    valid: bool
    condition_margin: float
    condition: str
    helpers: dict[str, float] = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return not self.valid


def _margin(disc: float, normalizer: float, params: ModelParams) -> float:
    if normalizer == 0.0:
        normalizer = params.total_mass**2
    return disc / normalizer


def _check_state_params(state, params: ModelParams) -> None:
    if not math.isclose(state.delta1, params.delta1, rel_tol=1e-12):
        raise ValueError(
            f"state.delta1={state.delta1!r} is inconsistent with the model "
            f"(sqrt(m1/beta1)={params.delta1!r})"
        )
    hbar = getattr(state, "hbar", params.hbar)
    if not math.isclose(hbar, params.hbar, rel_tol=1e-12):
        raise ValueError(f"state.hbar={hbar!r} differs from params.hbar={params.hbar!r}")


def _prediction(value_from_disc, disc, normalizer, condition, params, helpers):
    helpers = dict(helpers)
    helpers["disc"] = disc
    margin = _margin(disc, normalizer, params)
    if disc > 0.0:
        return FtPrediction(value_from_disc(disc), True, margin, condition, helpers)
    return FtPrediction(math.inf, False, margin, condition, helpers)


def ft_classical(state: ClassicalState, params: ModelParams) -> FtPrediction:
    """Exponential work average for a classical preparation over [0, v*tau].

    Thermal-Gaussian and thermal-thermal give M/|m1 - m2| regardless of any
    other detail of the preparation; the momentum-locked family shifts the
    denominator by 2*m1*c.  At a vanishing denominator the average diverges
    (equal masses, or the critical correlation strength).
    """
    _check_state_params(state, params)
    m1, m2, M = params.m1, params.m2, params.total_mass
    if isinstance(state, (ClassicalThermalGaussian, ClassicalThermalThermal)):
        disc = (m1 - m2) ** 2
        condition = "equal-mass singularity: (m1 - m2)^2 > 0"
        helpers = {}
    elif isinstance(state, ClassicalMomentumCorrelated):
        disc = (m1 - m2 + 2 * m1 * state.c) ** 2
        condition = "critical correlation: (m1 - m2 + 2*m1*c)^2 > 0"
        helpers = {"c": state.c}
    else:
        raise TypeError(f"not a classical state: {state!r}")
    return _prediction(lambda d: M / math.sqrt(d), disc, M**2, condition, params, helpers)


def _base_disc(m1: float, m2: float, eps: float, gamma: float) -> float:
    return (m1 - m2) ** 2 - 4 * m1 * (m1 * gamma**2 + m2 * eps**2)


def ft_quantum(state: QuantumState, params: ModelParams) -> FtPrediction:
    """Exact exponential work average for a quantum preparation over [0, v*tau]."""
    _check_state_params(state, params)
    m1, m2, M = params.m1, params.m2, params.total_mass
    eps, gamma = state.eps, state.gamma
    base = _base_disc(m1, m2, eps, gamma)
    norm = (m1 - m2) ** 2
    helpers = {"eps": eps, "gamma": gamma, "base_disc": base}

    if isinstance(state, QuantumThermalGaussian):
        drift = (
            math.exp(2 * m1**2 * eps**2 * state.p2bar**2 / (base * state.delta1**2))
            if base > 0
            else math.inf
        )
        helpers["centroid_factor"] = drift
        return _prediction(
            lambda d: M / math.sqrt(d) * drift, base, norm,
            "base_disc > 0", params, helpers,
        )

    if isinstance(state, QuantumThermalThermal):
        shift = 4 * eps**2 * m1**2 * (state.delta2 / state.delta1) ** 2
        helpers["thermal_shift"] = shift
        return _prediction(
            lambda d: M / math.sqrt(d), base - shift, norm,
            "base_disc - thermal_shift > 0", params, helpers,
        )

    if isinstance(state, MomentumCorrelated):
        c = state.c
        lead = (m1 - m2 + 2 * m1 * c) ** 2
        shift = 4 * m1**2 * (eps**4 + eps**2 * (c**2 + m2 / m1))
        helpers.update({"c": c, "corr_shift": shift})
        return _prediction(
            lambda d: M / math.sqrt(d), lead - shift, lead,
            "(m1 - m2 + 2*m1*c)^2 - corr_shift > 0", params, helpers,
        )

    if isinstance(state, AgentSuperposition):
        eta = state.eta
        if base > 0:
            boost = 1.0 + (2 * m1 * gamma) ** 2 / base
            phase = (
                (params.hbar * state.p2bar / (state.dx * state.delta1**2))
                * (eps * eta * m1) ** 2 / base
                if state.dx > 0
                else 0.0
            )
            drift = math.exp(2 * m1**2 * eps**2 * state.p2bar**2 / (base * state.delta1**2))
            interference = (1.0 + math.exp(-boost * eta**2 / 8.0) * math.cos(phase)) / (
                1.0 + math.exp(-(eta**2) / 8.0)
            )
        else:
            boost = phase = drift = interference = math.inf
        helpers.update(
            {"eta": eta, "decay_boost": boost, "phase": phase,
             "centroid_factor": drift, "interference_factor": interference}
        )
        return _prediction(
            lambda d: M / math.sqrt(d) * drift * interference, base, norm,
            "base_disc > 0", params, helpers,
        )

    if isinstance(state, EntangledPair):
        theta = state.theta
        correction = (
            0.0 if math.isinf(theta)
            else 4 * m1**2 * gamma**2 / (1.0 + theta**2 * (1.0 + eps**2))
        )
        helpers.update({"theta": theta, "corr": state.corr, "entangle_shift": correction})
        return _prediction(
            lambda d: M / math.sqrt(d), base + correction, norm,
            "base_disc + entangle_shift > 0", params, helpers,
        )

    if isinstance(state, PositionCorrelated):
        helpers.update({"theta": state.theta, "corr": state.corr})
        return _prediction(
            lambda d: M / math.sqrt(d), base, norm, "base_disc > 0", params, helpers,
        )

    raise TypeError(f"not a quantum state: {state!r}")


def backaction_factor(gamma: float, m1: float, m2: float) -> float:
    """Amplification of the equal-footing result by the agent's back-reaction."""
    ratio_sq = (2 * m1 * gamma / (m1 - m2)) ** 2
    if ratio_sq >= 1.0:
        return math.inf
    return 1.0 / math.sqrt(1.0 - ratio_sq)


def attenuation_factor(gamma: float, eta: float, mass_ratio: float) -> float:
    """Interference attenuation in (0, 1]; tends to one as eta grows."""
    g_sq = (2 * mass_ratio * gamma / (1.0 - mass_ratio)) ** 2
    if g_sq >= 1.0:
        raise DomainError(
            f"mass_ratio={mass_ratio} is at or beyond the bound 1/(1+2*gamma)"
        )
    big_gamma_sq = 1.0 / (1.0 - g_sq)
    return (1.0 + math.exp(-(eta**2) * big_gamma_sq / 8.0)) / (1.0 + math.exp(-(eta**2) / 8.0))


def xi_surface(gamma: float, eta_grid, ratio_grid) -> np.ndarray:
    """Attenuation over an (eta, mass-ratio) grid at fixed gamma.

    Ratios must lie strictly inside (0, 1/(1+2*gamma)); beyond that bound the
    underlying amplification factor is no longer defined.
    """
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"gamma must be finite and > 0, got {gamma!r}")
    eta = np.asarray(eta_grid, dtype=float)
    ratio = np.asarray(ratio_grid, dtype=float)
    bound = 1.0 / (1.0 + 2.0 * gamma)
    if np.any(ratio <= 0.0) or np.any(ratio >= bound):
        raise DomainError(f"ratio grid must lie inside (0, {bound})")
    g_sq = (2.0 * ratio * gamma / (1.0 - ratio)) ** 2
    big_gamma_sq = 1.0 / (1.0 - g_sq)
    num = 1.0 + np.exp(-np.outer(eta**2, big_gamma_sq) / 8.0)
    den = 1.0 + np.exp(-(eta**2) / 8.0)
    return num / den[:, None]


def ft_quantum_approx(state: QuantumState, params: ModelParams, regime: str) -> FtPrediction:
    """Reduced-regime approximations to the exact quantum averages.

    Regimes: "eps_first_order" (first order in eps, any agent width),
    "eps_ll_gamma_ll_1" (delocalised agent, classical-looking limits) and
    "eps_ll_1" (thermal receiver limit of the correlated families).
    """
    _check_state_params(state, params)
    if regime not in REGIMES:
        raise RegimeUnavailable(f"unknown regime {regime!r}; expected one of {REGIMES}")
    m1, m2, M = params.m1, params.m2, params.total_mass
    eps, gamma = state.eps, state.gamma
    norm = (m1 - m2) ** 2
    helpers = {"eps": eps, "gamma": gamma}

    def classical_like():
        return _prediction(
            lambda d: M / math.sqrt(d), norm, M**2,
            "equal-mass singularity: (m1 - m2)^2 > 0", params, helpers,
        )

    if isinstance(state, (QuantumThermalGaussian, QuantumThermalThermal)):
        if regime == "eps_ll_gamma_ll_1":
            return classical_like()
        if regime == "eps_first_order" and isinstance(state, QuantumThermalGaussian):
            disc = norm - (2 * m1 * gamma) ** 2
            helpers["backaction"] = backaction_factor(gamma, m1, m2)
            return _prediction(
                lambda d: M / math.sqrt(d), disc, norm,
                "(m1 - m2)^2 - (2*m1*gamma)^2 > 0", params, helpers,
            )
    elif isinstance(state, MomentumCorrelated):
        if regime == "eps_ll_1":
            disc = (m1 - m2 + 2 * m1 * state.c) ** 2
            helpers["c"] = state.c
            return _prediction(
                lambda d: M / math.sqrt(d), disc, M**2,
                "critical correlation: (m1 - m2 + 2*m1*c)^2 > 0", params, helpers,
            )
    elif isinstance(state, AgentSuperposition):
        if regime == "eps_ll_1":
            return classical_like()
        if regime == "eps_ll_gamma_ll_1":
            disc = norm - (2 * m1 * gamma) ** 2
            if disc <= 0:
                helpers["eta"] = state.eta
                return _prediction(
                    lambda d: math.inf, disc, norm,
                    "(m1 - m2)^2 - (2*m1*gamma)^2 > 0", params, helpers,
                )
            xi = attenuation_factor(gamma, state.eta, m1 / m2)
            helpers.update({"eta": state.eta, "attenuation": xi,
                            "backaction": backaction_factor(gamma, m1, m2)})
            return _prediction(
                lambda d: M / math.sqrt(d) * xi, disc, norm,
                "(m1 - m2)^2 - (2*m1*gamma)^2 > 0", params, helpers,
            )
    elif isinstance(state, EntangledPair):
        if regime == "eps_ll_1":
            s12 = state.sigma1 * state.sigma2
            # hbar^2/(corr^2*(1+theta^2)) written so corr = 0 is regular
            correction = (params.hbar * params.beta1) ** 2 / (
                state.corr**2 + params.hbar**2 / (4 * s12**2)
            )
            disc = norm - correction
            helpers.update({"theta": state.theta, "corr": state.corr,
                            "entangle_shift": -correction})
            return _prediction(
                lambda d: M / math.sqrt(d), disc, norm,
                "(m1 - m2)^2 - hbar^2*beta1^2/(corr^2*(1+theta^2)) > 0",
                params, helpers,
            )
    elif isinstance(state, PositionCorrelated):
        if regime == "eps_ll_1":
            # hbar*beta1/(corr*theta) reduces to 2*beta1*sigma1*sigma2: no hbar
            correction = (2 * params.beta1 * state.sigma1 * state.sigma2) ** 2
            disc = norm - correction
            helpers.update({"theta": state.theta, "corr": state.corr})
            return _prediction(
                lambda d: M / math.sqrt(d), disc, norm,
                "(m1 - m2)^2 - (2*beta1*sigma1*sigma2)^2 > 0", params, helpers,
            )
    raise RegimeUnavailable(f"regime {regime!r} is not available for variant {state.variant!r}")


def jensen_bound(prediction: FtPrediction, beta1: float) -> float:
    """Lower bound on the mean work implied by the exponential average.

    Negative exactly when the average exceeds one, i.e. when the agent can on
    average extract energy from the receiver.
    """
    if not prediction.valid:
        raise ValueError("prediction is beyond its convergence boundary; no finite bound")
    if beta1 <= 0:
        raise ValueError("beta1 must be > 0")
    return -math.log(prediction.value) / beta1
