"""Classical preparations of the pair and reproducible phase-space sampling.

Three families are supported:

* thermal receiver + Gaussian agent ("tg"),
* thermal receiver + thermal agent ("tt"),
* thermal receiver with the agent momentum locked to p2 = c*p1 ("corr").

The receiver's position distribution is physically irrelevant for work over
odd half-period intervals (the work depends on momenta only), so position
marginals default to unit-width zero-centred Gaussians and are configurable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .model import ModelParams

__all__ = [
    "ClassicalThermalGaussian",
    "ClassicalThermalThermal",
    "ClassicalMomentumCorrelated",
    "ClassicalState",
    "SampleBatch",
    "sample",
    "momentum_density",
    "momentum_moments",
]

_CHUNK = 1 << 16


def _check_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ClassicalThermalGaussian:
    """Thermal receiver (momentum width delta1) with a Gaussian agent.

    The agent is a phase-space Gaussian centred at (x2bar, p2bar) with
    momentum width sigma2 and the minimum-uncertainty position width
    hbar/(2*sigma2).
    """

    delta1: float
    sigma2: float
    x2bar: float = 0.0
    p2bar: float = 0.0
    x1_width: float = 1.0
    hbar: float = 1.0
    variant: str = field(default="tg", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, sigma2=self.sigma2,
                        x1_width=self.x1_width, hbar=self.hbar)

    @classmethod
    def from_params(cls, params: ModelParams, sigma2: float, x2bar: float = 0.0,
                    p2bar: float = 0.0, x1_width: float = 1.0) -> "ClassicalThermalGaussian":
        return cls(params.delta1, sigma2, x2bar, p2bar, x1_width, params.hbar)


@dataclass(frozen=True)
class ClassicalThermalThermal:
    """Both particles thermal, with momentum widths delta1 and delta2."""

    delta1: float
    delta2: float
    x1_width: float = 1.0
    x2_width: float = 1.0
    variant: str = field(default="tt", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, delta2=self.delta2,
                        x1_width=self.x1_width, x2_width=self.x2_width)

    @classmethod
    def from_params(cls, params: ModelParams, delta2: float, x1_width: float = 1.0,
                    x2_width: float = 1.0) -> "ClassicalThermalThermal":
        return cls(params.delta1, delta2, x1_width, x2_width)


@dataclass(frozen=True)
class ClassicalMomentumCorrelated:
    """Thermal receiver with the agent momentum pinned to p2 = c*p1.

    The momentum marginals are both thermal (widths delta1 and c*delta1); c
    measures at once the correlation strength and the agent's effective
    temperature.
    """

    delta1: float
    c: float
    x1_width: float = 1.0
    x2_width: float = 1.0
    variant: str = field(default="corr", init=False)

    def __post_init__(self):
        _check_positive(delta1=self.delta1, x1_width=self.x1_width, x2_width=self.x2_width)
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be finite and >= 0, got {self.c!r}")

    @classmethod
    def from_params(cls, params: ModelParams, c: float, x1_width: float = 1.0,
                    x2_width: float = 1.0) -> "ClassicalMomentumCorrelated":
        return cls(params.delta1, c, x1_width, x2_width)


ClassicalState = Union[
    ClassicalThermalGaussian, ClassicalThermalThermal, ClassicalMomentumCorrelated
]


@dataclass(frozen=True)
class SampleBatch:
    """A reproducible batch of phase-space points, shape (n, 4)."""

    seed: int
    n: int
    points: np.ndarray

    def __post_init__(self):
        if self.points.shape != (self.n, 4):
            raise ValueError("points must have shape (n, 4)")


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based generator keyed by (seed, chunk index): disjoint
    # substreams that can be produced in any order or in parallel.
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def chunk_layout(n: int, chunk: int = _CHUNK) -> list[tuple[int, int]]:
    """(stream index, size) pairs; fixed function of n so merging is stable."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    done = 0
    index = 0
    while done < n:
        size = min(chunk, n - done)
        out.append((index, size))
        done += size
        index += 1
    return out


def _draw_chunk(state: ClassicalState, seed: int, index: int, size: int) -> np.ndarray:
    rng = _chunk_rng(seed, index)
    pts = np.empty((size, 4))
    if isinstance(state, ClassicalThermalGaussian):
        z = rng.standard_normal((size, 4))
        pts[:, 0] = state.x1_width * z[:, 0]
        pts[:, 1] = state.delta1 * z[:, 1]
        pts[:, 2] = state.x2bar + (state.hbar / (2 * state.sigma2)) * z[:, 2]
        pts[:, 3] = state.p2bar + state.sigma2 * z[:, 3]
    elif isinstance(state, ClassicalThermalThermal):
        z = rng.standard_normal((size, 4))
        pts[:, 0] = state.x1_width * z[:, 0]
        pts[:, 1] = state.delta1 * z[:, 1]
        pts[:, 2] = state.x2_width * z[:, 2]
        pts[:, 3] = state.delta2 * z[:, 3]
    elif isinstance(state, ClassicalMomentumCorrelated):
        z = rng.standard_normal((size, 3))
        pts[:, 0] = state.x1_width * z[:, 0]
        pts[:, 1] = state.delta1 * z[:, 1]
        pts[:, 2] = state.x2_width * z[:, 2]
        pts[:, 3] = state.c * pts[:, 1]
    else:
        raise TypeError(f"not a classical state: {state!r}")
    return pts


def sample(state: ClassicalState, seed: int, n: int, chunk: int = _CHUNK) -> SampleBatch:
    """Draw n i.i.d. phase-space points; identical (state, seed, n) gives identical bytes."""
    parts = [_draw_chunk(state, seed, i, size) for i, size in chunk_layout(n, chunk)]
    return SampleBatch(seed=seed, n=n, points=np.concatenate(parts, axis=0))


def _gauss(p, mu, var):
    return np.exp(-((np.asarray(p, dtype=float) - mu) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def momentum_density(state: ClassicalState, p1, p2):
    """Joint momentum density; for the locked family, the density along the line.

    The locked ("corr") family is singular in the plane: off the line
    p2 = c*p1 the density is zero, and on the line the returned value is the
    one-dimensional thermal density in p1 (which integrates to one along the
    line's p1 parametrisation).
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if isinstance(state, ClassicalThermalGaussian):
        return _gauss(p1, 0.0, state.delta1**2) * _gauss(p2, state.p2bar, state.sigma2**2)
    if isinstance(state, ClassicalThermalThermal):
        return _gauss(p1, 0.0, state.delta1**2) * _gauss(p2, 0.0, state.delta2**2)
    if isinstance(state, ClassicalMomentumCorrelated):
        scale = state.delta1 * max(1.0, state.c)
        on_line = np.isclose(p2, state.c * p1, rtol=1e-9, atol=1e-12 * scale)
        return np.where(on_line, _gauss(p1, 0.0, state.delta1**2), 0.0)
    raise TypeError(f"not a classical state: {state!r}")


def momentum_moments(state: ClassicalState) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance of (p1, p2); the locked family is rank one."""
    if isinstance(state, ClassicalThermalGaussian):
        mean = np.array([0.0, state.p2bar])
        cov = np.diag([state.delta1**2, state.sigma2**2])
    elif isinstance(state, ClassicalThermalThermal):
        mean = np.zeros(2)
        cov = np.diag([state.delta1**2, state.delta2**2])
    elif isinstance(state, ClassicalMomentumCorrelated):
        mean = np.zeros(2)
        v = state.delta1**2
        cov = np.array([[v, state.c * v], [state.c * v, state.c**2 * v]])
    else:
        raise TypeError(f"not a classical state: {state!r}")
    return mean, cov
