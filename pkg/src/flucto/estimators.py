"""Independent numerical estimators for the closed-form work relations.

Classical preparations get plain Monte Carlo over the initial distribution
(no reweighting, so variance pathologies show up honestly in the effective
sample size).  Quantum preparations get a deterministic tensor-product
trapezoid rule.  The grid lives in coordinates that whiten the *combined*
Gaussian factor of the integrand (state covariance merged with the quadratic
form of the exponential weight); whitening by the state alone leaves the
integrand arbitrarily broad near the convergence boundary, where the default
radius would silently truncate mass.  Divergence is detected analytically
from the eigenvalues of that combined quadratic form before any grid is laid
down, because a near-boundary integrand looks perfectly summable on any
finite grid.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .closed_forms import ft_classical
from .model import ModelParams, ProcessInterval, flow_matrix, work_eigenvalue
from .states_classical import (
    ClassicalMomentumCorrelated,
    ClassicalState,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
    chunk_layout,
    _draw_chunk,
)
from .states_quantum import QuantumState, gaussian_envelope

_CLASSICAL = (ClassicalThermalGaussian, ClassicalThermalThermal, ClassicalMomentumCorrelated)

__all__ = [
    "NonIntegrable",
    "FtEstimate",
    "QuadratureConfig",
    "estimate_mc",
    "estimate_quadrature",
    "mean_work",
]

_ESS_FLOOR = 10.0


class NonIntegrable(ValueError):
    """The exponential average diverges; detected before integration."""


@dataclass(frozen=True)
class FtEstimate:
    """A numerical estimate: value, one-sigma/truncation error and diagnostics."""

    value: float
    error: float
    n: int
    method: str
    diverged: bool = False
    ess: float | None = None


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor-grid settings: half-width in whitened units, nodes per axis."""

    radius: float = 12.0
    nodes: int = 257
    levels: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius >= 6.0):
            raise ValueError(f"radius must be >= 6, got {self.radius!r}")
        if not (isinstance(self.nodes, int) and self.nodes >= 9 and self.nodes % 2 == 1):
            raise ValueError(f"nodes must be an odd integer >= 9, got {self.nodes!r}")
        if not (isinstance(self.levels, int) and self.levels >= 2):
            raise ValueError(f"levels must be an integer >= 2, got {self.levels!r}")


def _work_values(points: np.ndarray, interval: ProcessInterval, params: ModelParams) -> np.ndarray:
    if interval.is_half_period_multiple:
        return work_eigenvalue(points[:, 1], points[:, 3], params)
    row = flow_matrix(interval.t, params)[1]
    p1_t = points @ row
    return (p1_t**2 - points[:, 1] ** 2) / (2 * params.m1)


def _mc_reduce(state, params, interval, n, seed, chunk, threads, transform):
    """Chunked reduction of (sum, sum of squares, count) over transform(work).

    Chunks are keyed substreams, so the reduction is byte-stable for a given
    (state, seed, n, chunk) no matter how many workers evaluate them.
    """
    layout = chunk_layout(n, chunk)

    def one(item):
        index, size = item
        pts = _draw_chunk(state, seed, index, size)
        values = transform(_work_values(pts, interval, params))
        return float(np.sum(values)), float(np.sum(values * values))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one, layout))
    else:
        partials = [one(item) for item in layout]
    total = 0.0
    total_sq = 0.0
    for s, s2 in partials:  # fixed chunk order, independent of scheduling
        total += s
        total_sq += s2
    return total, total_sq


def estimate_mc(
    state: ClassicalState,
    params: ModelParams,
    interval: ProcessInterval,
    n: int,
    seed: int,
    beta: float | None = None,
    threads: int = 1,
    chunk: int = 1 << 16,
) -> FtEstimate:
    """Monte Carlo estimate of <exp(-beta*W)> over the classical preparation.

    beta defaults to the receiver's beta1; passing beta=0 turns the average
    into the trivial constant one (useful as an estimator self-test).  The
    estimate is flagged as diverged when the closed form says the average
    does not exist, or when the weights concentrate on fewer than ~10
    effective samples.
    """
    if n < 10**4:
        raise ValueError("n must be at least 1e4 for a meaningful exponential average")
    if beta is None:
        beta = params.beta1

    def weights(w):
        with np.errstate(over="ignore"):
            return np.exp(-beta * w)

    total, total_sq = _mc_reduce(state, params, interval, n, seed, chunk, threads, weights)
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    stderr = math.sqrt(var / n)
    ess = total * total / total_sq if total_sq > 0 else 0.0
    diverged = (not math.isfinite(mean)) or ess < _ESS_FLOOR
    if interval.is_half_period_multiple and beta == params.beta1:
        diverged = diverged or ft_classical(state, params).condition_margin <= 0.0
    return FtEstimate(mean, stderr, n, "monte_carlo", diverged, ess)


def _work_quadratic(params: ModelParams, beta: float) -> np.ndarray:
    # w(p) = p^T Q p; returns A = -beta*Q so that exp(-beta*w) = exp(p^T A p)
    m1, m2, M = params.m1, params.m2, params.total_mass
    q = (2.0 / M**2) * np.array([[-m2, (m1 - m2) / 2.0], [(m1 - m2) / 2.0, m1]])
    return -beta * q


def _tensor_integral(mean, cov, quad, poly, modulation, nodes, radius):
    """Integral of exp(p^T quad p) * N(p; mean, cov) * poly(p) * modulation(p)."""
    cov_inv = np.linalg.inv(cov)
    combined = cov_inv - 2.0 * quad
    combined = 0.5 * (combined + combined.T)
    transform = np.linalg.cholesky(np.linalg.inv(combined))
    grid = np.linspace(-radius, radius, nodes)
    step = grid[1] - grid[0]
    wts = np.full(nodes, step)
    wts[0] = wts[-1] = step / 2.0
    z1, z2 = np.meshgrid(grid, grid, indexing="ij")
    p1 = mean[0] + transform[0, 0] * z1 + transform[0, 1] * z2
    p2 = mean[1] + transform[1, 0] * z1 + transform[1, 1] * z2
    d1, d2 = p1 - mean[0], p2 - mean[1]
    log_gauss = -0.5 * (
        cov_inv[0, 0] * d1 * d1 + 2.0 * cov_inv[0, 1] * d1 * d2 + cov_inv[1, 1] * d2 * d2
    ) - math.log(2.0 * math.pi) - 0.5 * math.log(np.linalg.det(cov))
    log_weight = quad[0, 0] * p1 * p1 + 2.0 * quad[0, 1] * p1 * p2 + quad[1, 1] * p2 * p2
    values = np.exp(log_gauss + log_weight)
    if poly is not None:
        values = values * poly(p1, p2)
    if modulation is not None:
        values = values * modulation(p1, p2)
    jac = abs(transform[0, 0] * transform[1, 1] - transform[0, 1] * transform[1, 0])
    return jac * float(wts @ values @ wts)


def _check_integrable(cov, quad) -> None:
    combined = np.linalg.inv(cov) - 2.0 * quad
    eigenvalues = np.linalg.eigvalsh(0.5 * (combined + combined.T))
    if np.min(eigenvalues) <= 0.0:
        raise NonIntegrable(
            "combined Gaussian-plus-weight quadratic form is not positive definite "
            f"(eigenvalues {eigenvalues})"
        )


def _coarsen(nodes: int) -> int:
    coarse = (nodes - 1) // 2 + 1
    return coarse if coarse % 2 == 1 else coarse + 1


def _refined(mean, cov, quad, poly, modulation, config: QuadratureConfig):
    value = _tensor_integral(mean, cov, quad, poly, modulation, config.nodes, config.radius)
    nodes, radius = config.nodes, config.radius
    check = value
    for _ in range(config.levels - 1):
        nodes = max(_coarsen(nodes), 9)
        radius = max(radius - 2.0, 4.0)
        check = _tensor_integral(mean, cov, quad, poly, modulation, nodes, radius)
    return value, abs(value - check)


def estimate_quadrature(
    state: QuantumState,
    params: ModelParams,
    config: QuadratureConfig | None = None,
    on_divergence: str = "raise",
) -> FtEstimate:
    """Deterministic grid estimate of <exp(-beta1*W)> for a quantum preparation.

    Raises NonIntegrable when the average provably diverges (set
    on_divergence="flag" to get a diverged FtEstimate instead, which is what
    the CLI does: divergence is data there, not failure).
    """
    if config is None:
        config = QuadratureConfig()
    if on_divergence not in ("raise", "flag"):
        raise ValueError("on_divergence must be 'raise' or 'flag'")
    mean, cov, modulation = gaussian_envelope(state)
    quad = _work_quadratic(params, params.beta1)
    try:
        _check_integrable(cov, quad)
    except NonIntegrable:
        if on_divergence == "raise":
            raise
        return FtEstimate(math.inf, math.inf, 0, "quadrature", diverged=True)
    value, error = _refined(mean, cov, quad, None, modulation, config)
    return FtEstimate(value, error, config.nodes**2, "quadrature", diverged=False)


def mean_work(
    state: ClassicalState | QuantumState,
    params: ModelParams,
    interval: ProcessInterval | None = None,
    n: int = 10**5,
    seed: int = 0,
    threads: int = 1,
    chunk: int = 1 << 16,
    config: QuadratureConfig | None = None,
) -> FtEstimate:
    """Mean work <W>: Monte Carlo for classical states, quadrature for quantum.

    Quantum mean work is only defined over the odd half-period intervals, so
    no interval argument applies there.
    """
    if not isinstance(state, _CLASSICAL):
        if config is None:
            config = QuadratureConfig()
        mean, cov, modulation = gaussian_envelope(state)

        def poly(p1, p2):
            return work_eigenvalue(p1, p2, params)

        value, error = _refined(mean, cov, np.zeros((2, 2)), poly, modulation, config)
        return FtEstimate(value, error, config.nodes**2, "quadrature", diverged=False)

    if interval is None:
        interval = ProcessInterval(v=1)
    if n < 10**4:
        raise ValueError("n must be at least 1e4")
    total, total_sq = _mc_reduce(state, params, interval, n, seed, chunk, threads, lambda w: w)
    mean_value = total / n
    var = max(total_sq - n * mean_value * mean_value, 0.0) / (n - 1)
    return FtEstimate(mean_value, math.sqrt(var / n), n, "monte_carlo", diverged=False)
