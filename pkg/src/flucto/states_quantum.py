"""Quantum preparations as analytic joint momentum densities.

All work statistics over odd half-period intervals need only the diagonal
kernel rho(p1, p2) = <p1, p2| rho |p1, p2>, which is available in closed form
for every family here.  Each closed form was reduced by completing Gaussian
squares and is pinned in the test suite against brute-force integrals of the
underlying wavefunctions.

Families:

* "tg"        thermal receiver x pure Gaussian agent
* "tt"        thermal receiver x thermal agent
* "mom_corr"  momenta classically correlated through a shared thermal weight
* "superpos"  agent in a coherent superposition of two displaced Gaussians
* "entangled" pure state correlating receiver momentum with agent position
* "pos_corr"  classical mixture correlating receiver momentum with agent position
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .model import ModelParams

__all__ = [
    "QuantumThermalGaussian",
    "QuantumThermalThermal",
    "MomentumCorrelated",
    "AgentSuperposition",
    "EntangledPair",
    "PositionCorrelated",
    "QuantumState",
    "gaussian_wavefunction",
    "receiver_matrix_element",
    "momentum_density",
    "gaussian_envelope",
]


def _check_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be finite and > 0, got {value!r}")


def _check_nonnegative(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value >= 0):
            raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


class _SharedWidths:
    """Dimensionless ratios shared by all quantum families."""

    @property
    def eps(self) -> float:
        """sigma1/delta1: receiver coherence relative to the thermal width."""
        return self.sigma1 / self.delta1

    @property
    def gamma(self) -> float:
        """sigma1*sigma2/delta1^2: joint quantum back-reaction scale."""
        return self.sigma1 * self.sigma2 / self.delta1**2


@dataclass(frozen=True)
class QuantumThermalGaussian(_SharedWidths):
    delta1: float
    sigma1: float
    sigma2: float
    x2bar: float = 0.0
    p2bar: float = 0.0
    hbar: float = 1.0
    variant: str = field(default="tg", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma1=self.sigma1,
                        sigma2=self.sigma2, hbar=self.hbar)


@dataclass(frozen=True)
class QuantumThermalThermal(_SharedWidths):
    delta1: float
    sigma1: float
    sigma2: float
    delta2: float
    hbar: float = 1.0
    variant: str = field(default="tt", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma1=self.sigma1,
                        sigma2=self.sigma2, delta2=self.delta2, hbar=self.hbar)


@dataclass(frozen=True)
class MomentumCorrelated(_SharedWidths):
    """Mixture of momentum-displaced Gaussian pairs with p2bar = c*p1bar.

    Both Gaussians share one momentum width sigma.
    """

    delta1: float
    sigma: float
    c: float
    hbar: float = 1.0
    variant: str = field(default="mom_corr", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma=self.sigma, hbar=self.hbar)
        _check_nonnegative(c=self.c)

    @property
    def sigma1(self) -> float:
        return self.sigma

    @property
    def sigma2(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class AgentSuperposition(_SharedWidths):
    """Agent in an even superposition of Gaussians displaced by dx in position."""

    delta1: float
    sigma1: float
    sigma2: float
    dx: float
    x2bar: float = 0.0
    p2bar: float = 0.0
    hbar: float = 1.0
    variant: str = field(default="superpos", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma1=self.sigma1,
                        sigma2=self.sigma2, hbar=self.hbar)
        _check_nonnegative(dx=self.dx)

    @property
    def eta(self) -> float:
        """2*sigma2*dx/hbar: packet separation over packet width."""
        return 2.0 * self.sigma2 * self.dx / self.hbar


@dataclass(frozen=True)
class EntangledPair(_SharedWidths):
    """Pure state entangling receiver momentum with agent position (strength corr)."""

    delta1: float
    sigma1: float
    sigma2: float
    corr: float
    hbar: float = 1.0
    variant: str = field(default="entangled", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma1=self.sigma1,
                        sigma2=self.sigma2, hbar=self.hbar)
        _check_nonnegative(corr=self.corr)

    @property
    def theta(self) -> float:
        """hbar/(2*corr*sigma1*sigma2); infinite in the uncorrelated limit."""
        if self.corr == 0.0:
            return math.inf
        return self.hbar / (2.0 * self.corr * self.sigma1 * self.sigma2)

    @property
    def norm_factor(self) -> float:
        """Normalisation of the continuous superposition over the mixing momentum."""
        return self.eps / math.sqrt(1.0 + self.eps**2 + _inv_sq(self.theta))


@dataclass(frozen=True)
class PositionCorrelated(_SharedWidths):
    """Classical mixture correlating receiver momentum with agent position."""

    delta1: float
    sigma1: float
    sigma2: float
    corr: float
    hbar: float = 1.0
    variant: str = field(default="pos_corr", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma1=self.sigma1,
                        sigma2=self.sigma2, hbar=self.hbar)
        _check_nonnegative(corr=self.corr)

    @property
    def theta(self) -> float:
        if self.corr == 0.0:
            return math.inf
        return self.hbar / (2.0 * self.corr * self.sigma1 * self.sigma2)


QuantumState = Union[
    QuantumThermalGaussian,
    QuantumThermalThermal,
    MomentumCorrelated,
    AgentSuperposition,
    EntangledPair,
    PositionCorrelated,
]


def _inv_sq(theta: float) -> float:
    return 0.0 if math.isinf(theta) else 1.0 / theta**2


def gaussian_wavefunction(center: tuple[float, float], sigma: float, u,
                          representation: str = "momentum", hbar: float = 1.0):
    """Amplitude of a minimum-uncertainty Gaussian centred at (xbar, pbar).

    sigma is the momentum width; the position width is hbar/(2*sigma).  The
    two representations are exact Fourier partners under the kernel
    exp(-i p x / hbar)/sqrt(2 pi hbar).
    """
    _check_positive(sigma=sigma, hbar=hbar)
    xbar, pbar = center
    u = np.asarray(u, dtype=float)
    if representation == "momentum":
        norm = (2.0 * np.pi * sigma**2) ** -0.25
        return norm * np.exp(-((u - pbar) ** 2) / (4 * sigma**2)
                             - 1j * (u - pbar) * xbar / hbar)
    if representation == "position":
        norm = (2.0 * sigma**2 / (np.pi * hbar**2)) ** 0.25
        return norm * np.exp(-(sigma**2) * (u - xbar) ** 2 / hbar**2 + 1j * pbar * u / hbar)
    raise ValueError(f"representation must be 'momentum' or 'position', got {representation!r}")


def receiver_matrix_element(delta1: float, sigma1: float, p1_out, p1_in):
    """Momentum matrix element of the receiver's effective thermal state.

    Real and symmetric; the diagonal is a normalised Gaussian of variance
    delta1^2 + sigma1^2, and off-diagonal coherences die out as sigma1 -> 0.
    """
    _check_positive(delta1=delta1, sigma1=sigma1)
    p1_out = np.asarray(p1_out, dtype=float)
    p1_in = np.asarray(p1_in, dtype=float)
    eps_sq = (sigma1 / delta1) ** 2
    v = delta1**2 * (1.0 + eps_sq)
    return np.exp(
        -(p1_out**2 + p1_in**2) / (4 * v)
        - (p1_out - p1_in) ** 2 / (8 * delta1**2 * eps_sq * (1.0 + eps_sq))
    ) / np.sqrt(2 * np.pi * v)


def _gauss(p, mu, var):
    return np.exp(-((np.asarray(p, dtype=float) - mu) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def _receiver_variance(state) -> float:
    return state.delta1**2 + state.sigma1**2


def _agent_variance(state) -> float:
    """Variance of the agent momentum marginal."""
    if isinstance(state, QuantumThermalGaussian):
        return state.sigma2**2
    if isinstance(state, QuantumThermalThermal):
        return state.delta2**2 + state.sigma2**2
    if isinstance(state, AgentSuperposition):
        return state.sigma2**2  # interference does not shift second moments
    if isinstance(state, EntangledPair):
        e2 = state.eps**2
        return state.sigma2**2 * (1.0 + e2) / (1.0 + e2 + _inv_sq(state.theta))
    if isinstance(state, PositionCorrelated):
        return state.sigma2**2
    raise TypeError(f"no single agent variance for {state!r}")


def momentum_density(state: QuantumState, p1, p2):
    """Joint momentum density <p1, p2|rho|p1, p2>; nonnegative and normalised."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    v1 = _receiver_variance(state)
    if isinstance(state, QuantumThermalGaussian):
        return _gauss(p1, 0.0, v1) * _gauss(p2, state.p2bar, state.sigma2**2)
    if isinstance(state, QuantumThermalThermal):
        return _gauss(p1, 0.0, v1) * _gauss(p2, 0.0, _agent_variance(state))
    if isinstance(state, MomentumCorrelated):
        d2, s2 = state.delta1**2, state.sigma**2
        c = state.c
        v11 = d2 + s2
        v22 = c**2 * d2 + s2
        v12 = c * d2
        det = v11 * v22 - v12**2
        q = (v22 * p1**2 - 2 * v12 * p1 * p2 + v11 * p2**2) / det
        return np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(det))
    if isinstance(state, AgentSuperposition):
        base = _gauss(p1, 0.0, v1) * _gauss(p2, state.p2bar, state.sigma2**2)
        mod = (1.0 + np.cos((p2 - state.p2bar) * state.dx / state.hbar)) / (
            1.0 + math.exp(-state.eta**2 / 8.0)
        )
        return base * mod
    if isinstance(state, (EntangledPair, PositionCorrelated)):
        return _gauss(p1, 0.0, v1) * _gauss(p2, 0.0, _agent_variance(state))
    raise TypeError(f"not a quantum state: {state!r}")


def gaussian_envelope(
    state: QuantumState,
) -> tuple[np.ndarray, np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray] | None]:
    """Gaussian factorisation of the density: (mean, covariance, modulation).

    The density equals N(mean, cov) times the bounded modulation (None means
    identically one).  Quadrature and divergence analysis key off this.
    """
    v1 = _receiver_variance(state)
    if isinstance(state, MomentumCorrelated):
        _, cov = momentum_mean_cov(state)
        return np.zeros(2), cov, None
    if isinstance(state, AgentSuperposition):
        mean = np.array([0.0, state.p2bar])
        cov = np.diag([v1, state.sigma2**2])
        norm = 1.0 + math.exp(-state.eta**2 / 8.0)
        p2bar, dx, hbar = state.p2bar, state.dx, state.hbar

        def modulation(p1, p2):
            return (1.0 + np.cos((p2 - p2bar) * dx / hbar)) / norm

        return mean, cov, modulation
    mean = np.array([0.0, state.p2bar if isinstance(state, QuantumThermalGaussian) else 0.0])
    return mean, np.diag([v1, _agent_variance(state)]), None


def momentum_mean_cov(state: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of (p1, p2) under the joint momentum density."""
    v1 = _receiver_variance(state)
    if isinstance(state, MomentumCorrelated):
        d2, s2, c = state.delta1**2, state.sigma**2, state.c
        cov = np.array([[d2 + s2, c * d2], [c * d2, c**2 * d2 + s2]])
        return np.zeros(2), cov
    mean = np.array([0.0, getattr(state, "p2bar", 0.0)])
    return mean, np.diag([v1, _agent_variance(state)])


def states_from_params(params: ModelParams, variant: str, **kw) -> QuantumState:
    """Construct a quantum state with delta1 and hbar taken from the model."""
    base = dict(delta1=params.delta1, hbar=params.hbar)
    table = {
        "tg": QuantumThermalGaussian,
        "tt": QuantumThermalThermal,
        "mom_corr": MomentumCorrelated,
        "superpos": AgentSuperposition,
        "entangled": EntangledPair,
        "pos_corr": PositionCorrelated,
    }
    if variant not in table:
        raise ValueError(f"unknown quantum variant {variant!r}")
    return table[variant](**base, **kw)
