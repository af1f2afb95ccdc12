"""Two-point measurement protocol for the position-correlating preparations.

The protocol projectively reads the receiver's momentum, lets the pair evolve
over an odd half-period interval, and reads the receiver's momentum again;
work is the kinetic-energy difference of the two outcomes.  The first
measurement destroys the correlation between receiver momentum and agent
position, so the entangled and the classically position-correlated
preparations with matching strength produce literally the same outcome
statistics: the protocol cannot tell them apart, and its exponential work
average misses the correlation term of the exact relation.

The second outcome is drawn from the exact linear combination of initial
momentum operators at v*tau (the position coefficient vanishes there), which
avoids any grid evolution.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .estimators import FtEstimate
from .model import ModelParams
from .states_classical import chunk_layout
from .states_quantum import EntangledPair, PositionCorrelated, gaussian_wavefunction

__all__ = [
    "UnsupportedState",
    "PostMeasurementState",
    "TpmRecord",
    "TpmRun",
    "first_measurement_density",
    "post_measurement_state",
    "run_tpm",
    "conditional_agent_overlap",
    "ks_statistic",
    "ks_critical",
]

_TPM_STATES = (EntangledPair, PositionCorrelated)


class UnsupportedState(TypeError):
    """The TPM protocol is implemented for the position-correlating families only."""


@dataclass(frozen=True)
class PostMeasurementState:
    """Product of two Gaussians left behind by the first measurement outcome p.

    Receiver centred at momentum p (width sigma1), agent at position corr*p
    (width sigma2).  Matched entangled/classical preparations with equal
    correlation strength collapse to the same product for every outcome.
    """

    p: float
    sigma1: float
    sigma2: float
    corr: float
    hbar: float

    @property
    def receiver_center(self) -> tuple[float, float]:
        return (0.0, self.p)

    @property
    def agent_center(self) -> tuple[float, float]:
        return (self.corr * self.p, 0.0)


@dataclass(frozen=True)
class TpmRecord:
    """One protocol run: both outcomes and the prepared work."""

    first: float
    second: float
    work: float


@dataclass(frozen=True)
class TpmRun:
    """Records (first outcome, second outcome, work) plus the exponential average."""

    variant: str
    corr: float
    n: int
    seed: int
    exp_average: FtEstimate
    records: np.ndarray | None

    def record(self, i: int) -> TpmRecord:
        if self.records is None:
            raise ValueError("records were not kept for this run")
        first, second, work = self.records[i]
        return TpmRecord(float(first), float(second), float(work))


def _require_tpm_state(state) -> None:
    if not isinstance(state, _TPM_STATES):
        raise UnsupportedState(
            f"TPM protocol needs an entangled or position-correlated state, got {state!r}"
        )


def first_measurement_density(state, p):
    """Density of the first momentum outcome: identical for both families."""
    _require_tpm_state(state)
    variance = state.delta1**2 + state.sigma1**2
    p = np.asarray(p, dtype=float)
    return np.exp(-(p**2) / (2 * variance)) / np.sqrt(2 * np.pi * variance)


def post_measurement_state(state, p: float) -> PostMeasurementState:
    """Product Gaussian left by outcome p; accurate for sigma1 << delta1."""
    _require_tpm_state(state)
    if state.eps > 0.2:
        warnings.warn(
            "post-measurement product form assumes sigma1 << delta1 "
            f"(state has sigma1/delta1 = {state.eps:.3g})",
            stacklevel=2,
        )
    return PostMeasurementState(float(p), state.sigma1, state.sigma2, state.corr, state.hbar)


def run_tpm(
    state,
    params: ModelParams,
    v: int = 1,
    n: int = 10**5,
    seed: int = 0,
    keep_records: bool = True,
    chunk: int = 1 << 16,
) -> TpmRun:
    """Simulate n protocol runs; byte-reproducible in (state family, seed, n).

    The draw chain does not depend on the correlation parameter at all (the
    agent's momentum marginal is blind to its position centre), which is the
    protocol's indistinguishability made concrete: matched runs with a shared
    seed are bit-identical across the two families.
    """
    _require_tpm_state(state)
    if not (isinstance(v, int) and v > 0 and v % 2 == 1):
        raise ValueError(f"v must be a positive odd integer, got {v!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    m1, m2, M = params.m1, params.m2, params.total_mass
    a0, b0 = (m1 - m2) / M, 2 * m1 / M
    first_width = math.sqrt(state.delta1**2 + state.sigma1**2)
    beta1 = params.beta1

    total = 0.0
    total_sq = 0.0
    parts = []
    for index, size in chunk_layout(n, chunk):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))
        z = rng.standard_normal((size, 3))
        first = first_width * z[:, 0]
        second = a0 * (first + state.sigma1 * z[:, 1]) + b0 * state.sigma2 * z[:, 2]
        work = (second**2 - first**2) / (2 * m1)
        with np.errstate(over="ignore"):
            weight = np.exp(-beta1 * work)
        total += float(np.sum(weight))
        total_sq += float(np.sum(weight * weight))
        if keep_records:
            parts.append(np.column_stack([first, second, work]))
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / max(n - 1, 1)
    ess = total * total / total_sq if total_sq > 0 else 0.0
    estimate = FtEstimate(
        mean, math.sqrt(var / n), n, "monte_carlo",
        diverged=not math.isfinite(mean) or ess < 10.0, ess=ess,
    )
    records = np.concatenate(parts, axis=0) if keep_records else None
    return TpmRun(state.variant, state.corr, n, seed, estimate, records)


def conditional_agent_overlap(
    state: EntangledPair, p: float, momentum_nodes: int = 1501, position_nodes: int = 1501
) -> float:
    """Fidelity of the exact post-measurement agent state with the product form.

    The exact conditional agent amplitude after outcome p is a continuous
    superposition over the mixing momentum; its overlap with the claimed
    Gaussian centred at corr*p quantifies the sigma1 << delta1 approximation.
    """
    if not isinstance(state, EntangledPair):
        raise UnsupportedState("the exact conditional amplitude is defined for the entangled pair")
    d1, s1, s2, corr, hbar = state.delta1, state.sigma1, state.sigma2, state.corr, state.hbar
    # mixing weight g(pt) * <p|(0,pt)> concentrates pt near p within ~sqrt(2)*s1
    center = p * d1**2 / (d1**2 + s1**2)
    half = 10.0 * math.sqrt(2.0) * s1 + 0.5 * abs(p - center)
    pt = np.linspace(center - half, center + half, momentum_nodes)
    g = np.exp(-(pt**2) / (4 * d1**2))
    receiver_amp = np.exp(-((p - pt) ** 2) / (4 * s1**2))
    x_half = 10.0 * (corr * (half + s1) + hbar / (2 * s2)) + 1e-12
    x2 = np.linspace(corr * p - x_half, corr * p + x_half, position_nodes)
    agent = gaussian_wavefunction((0.0, 0.0), s2, x2[:, None] - corr * pt[None, :],
                                  representation="position", hbar=hbar)
    phi = np.trapezoid(g * receiver_amp * agent, pt, axis=1)
    claimed = gaussian_wavefunction((corr * p, 0.0), s2, x2, representation="position", hbar=hbar)
    num = abs(np.trapezoid(np.conj(claimed) * phi, x2)) ** 2
    den = np.trapezoid(np.abs(phi) ** 2, x2)
    return float(num / den)


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical distributions."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample critical distance at significance alpha."""
    if not (0 < alpha < 1):
        raise ValueError("alpha must be in (0, 1)")
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n + m) / (n * m))
