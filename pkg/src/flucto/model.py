"""Mechanical core: two particles coupled by a spring, exact linear flow, work.

Particle 1 is the receiver (the system work is done on), particle 2 the agent
(the system doing the work).  Work over an interval is the change of the
receiver's kinetic energy.  Over intervals [0, v*tau] with v odd and
tau = pi/omega the work reduces to a momentum-only quadratic form shared by
the classical and the quantum treatment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "PhasePoint",
    "ProcessInterval",
    "derived_params",
    "flow_matrix",
    "evolve_classical",
    "momentum_coefficients",
    "hamiltonian",
    "work_classical",
    "work_eigenvalue",
]


@dataclass(frozen=True)
class ModelParams:
    """Masses, spring constant and the receiver's inverse temperature.

    Natural units: hbar and k_B default to 1; hbar is kept explicit so that
    claims about hbar-(in)dependence can be probed by rescaling it.
    """

    m1: float
    m2: float
    k: float
    beta1: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "k", "beta1", "hbar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2

    @property
    def reduced_mass(self) -> float:
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def omega(self) -> float:
        return math.sqrt(self.k / self.reduced_mass)

    @property
    def tau(self) -> float:
        """Half period of the relative oscillation, pi/omega."""
        return math.pi / self.omega

    @property
    def delta1(self) -> float:
        """Thermal momentum width of the receiver, sqrt(m1/beta1)."""
        return math.sqrt(self.m1 / self.beta1)


@dataclass(frozen=True)
class PhasePoint:
    """A classical phase-space point (x1, p1, x2, p2)."""

    x1: float
    p1: float
    x2: float
    p2: float

    def __post_init__(self):
        for name in ("x1", "p1", "x2", "p2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.p1, self.x2, self.p2], dtype=float)

    @staticmethod
    def from_array(arr) -> "PhasePoint":
        x1, p1, x2, p2 = (float(v) for v in arr)
        return PhasePoint(x1, p1, x2, p2)


@dataclass(frozen=True)
class ProcessInterval:
    """Time interval of a process: either [0, v*tau] with v odd, or [0, t].

    The v*tau intervals are the ones where the work operator is diagonal in
    the joint momentum basis; generic t is supported for classical work only.
    """

    v: int | None = None
    t: float | None = None

    def __post_init__(self):
        if (self.v is None) == (self.t is None):
            raise ValueError("specify exactly one of v (odd half periods) or t (time)")
        if self.v is not None:
            if not (isinstance(self.v, int) and self.v > 0 and self.v % 2 == 1):
                raise ValueError(f"v must be a positive odd integer, got {self.v!r}")
        else:
            if not (math.isfinite(self.t) and self.t >= 0):
                raise ValueError(f"t must be finite and >= 0, got {self.t!r}")

    @property
    def is_half_period_multiple(self) -> bool:
        return self.v is not None

    def duration(self, params: ModelParams) -> float:
        return self.v * params.tau if self.v is not None else float(self.t)


def derived_params(params: ModelParams) -> tuple[float, float, float, float, float]:
    """(total mass, reduced mass, omega, tau, delta1)."""
    return (
        params.total_mass,
        params.reduced_mass,
        params.omega,
        params.tau,
        params.delta1,
    )


def _flow_matrix(t: float, m1: float, m2: float, k: float) -> np.ndarray:
    # Linear flow in (x1, p1, x2, p2): decouple into centre-of-mass drift and
    # relative-coordinate rotation, then map back.  k == 0 is the free limit.
    M = m1 + m2
    mu = m1 * m2 / M
    to_cm = np.array(
        [
            [m1 / M, 0.0, m2 / M, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [0.0, -mu / m1, 0.0, mu / m2],
        ]
    )
    from_cm = np.array(
        [
            [1.0, -m2 / M, 0.0, 0.0],
            [0.0, 0.0, m1 / M, -1.0],
            [1.0, m1 / M, 0.0, 0.0],
            [0.0, 0.0, m2 / M, 1.0],
        ]
    )
    if k == 0.0:
        u = np.array(
            [
                [1.0, 0.0, t / M, 0.0],
                [0.0, 1.0, 0.0, t / mu],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )
    else:
        w = math.sqrt(k / mu)
        c, s = math.cos(w * t), math.sin(w * t)
        u = np.array(
            [
                [1.0, 0.0, t / M, 0.0],
                [0.0, c, 0.0, s / (mu * w)],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, -mu * w * s, 0.0, c],
            ]
        )
    return from_cm @ u @ to_cm


def flow_matrix(t: float, params: ModelParams) -> np.ndarray:
    """4x4 matrix mapping the initial (x1, p1, x2, p2) to its value at time t."""
    return _flow_matrix(t, params.m1, params.m2, params.k)


def evolve_classical(point: PhasePoint, t: float, params: ModelParams) -> PhasePoint:
    """Propagate a phase-space point for a time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return PhasePoint.from_array(flow_matrix(t, params) @ point.as_array())


def momentum_coefficients(t: float, params: ModelParams) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of p1(t) = a*p1 + b*p2 + c*(x2 - x1).

    Momentum conservation fixes a(t) + (m2/m1)*b(t) = 1 for all t.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    m1, m2, M = params.m1, params.m2, params.total_mass
    ang = params.omega * t
    a = (m1 + m2 * math.cos(ang)) / M
    b = (1.0 - math.cos(ang)) * m1 / M
    c = params.reduced_mass * params.omega * math.sin(ang)
    return a, b, c


def hamiltonian(point: PhasePoint, params: ModelParams) -> float:
    """Total energy of a phase-space point."""
    return (
        point.p1**2 / (2 * params.m1)
        + point.p2**2 / (2 * params.m2)
        + 0.5 * params.k * (point.x2 - point.x1) ** 2
    )


def work_eigenvalue(p1, p2, params: ModelParams):
    """Work prepared by the momentum pair (p1, p2) over any odd half-period interval.

    Accepts scalars or arrays and broadcasts.
    """
    M = params.total_mass
    return (2.0 / M**2) * (params.m1 * np.asarray(p2) - params.m2 * np.asarray(p1)) * (
        np.asarray(p1) + np.asarray(p2)
    )


def work_classical(point: PhasePoint, interval: ProcessInterval, params: ModelParams) -> float:
    """Work done by the agent on the receiver over the interval.

    Over [0, v*tau] this is the momentum-only quadratic form (independent of
    the odd v); over a generic [0, t] it is the receiver's kinetic-energy
    change along the exact trajectory.
    """
    if interval.is_half_period_multiple:
        return float(work_eigenvalue(point.p1, point.p2, params))
    moved = evolve_classical(point, interval.t, params)
    return (moved.p1**2 - point.p1**2) / (2 * params.m1)
