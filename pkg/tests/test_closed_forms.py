import functools
import math

import numpy as np
import pytest

from flucto import (
    AgentSuperposition,
    ClassicalMomentumCorrelated,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
    DomainError,
    EntangledPair,
    ModelParams,
    MomentumCorrelated,
    PositionCorrelated,
    QuantumThermalGaussian,
    QuantumThermalThermal,
    RegimeUnavailable,
    attenuation_factor,
    backaction_factor,
    ft_classical,
    ft_quantum,
    ft_quantum_approx,
    jensen_bound,
    xi_surface,
)
from flucto.states_quantum import gaussian_envelope


def gauss_expect(quad, mean, cov):
    """Exact E[exp(p^T quad p)] for p ~ N(mean, cov); test-side reference."""
    eye = np.eye(2)
    growth = eye - 2.0 * cov @ quad
    det = np.linalg.det(growth)
    precision = np.linalg.inv(cov) - 2.0 * quad
    if det <= 0 or np.any(np.linalg.eigvalsh(0.5 * (precision + precision.T)) <= 0):
        return math.inf
    cov_inv = np.linalg.inv(cov)
    shift = 0.5 * mean @ (cov_inv @ np.linalg.inv(precision) @ cov_inv - cov_inv) @ mean
    return math.exp(shift) / math.sqrt(det)


def work_quad(params, beta=None):
    beta = params.beta1 if beta is None else beta
    m1, m2, M = params.m1, params.m2, params.total_mass
    return -beta * (2.0 / M**2) * np.array(
        [[-m2, (m1 - m2) / 2.0], [(m1 - m2) / 2.0, m1]]
    )


def reference_value(state, params, nodes=4001, radius=10.0):
    """Log-space trapezoid over the combined-whitened plane; handles modulation."""
    mean, cov, modulation = gaussian_envelope(state)
    quad = work_quad(params)
    precision = np.linalg.inv(cov) - 2.0 * quad
    precision = 0.5 * (precision + precision.T)
    transform = np.linalg.cholesky(np.linalg.inv(precision))
    grid = np.linspace(-radius, radius, nodes)
    z1, z2 = np.meshgrid(grid, grid, indexing="ij")
    p1 = mean[0] + transform[0, 0] * z1 + transform[0, 1] * z2
    p2 = mean[1] + transform[1, 0] * z1 + transform[1, 1] * z2
    d1, d2 = p1 - mean[0], p2 - mean[1]
    cov_inv = np.linalg.inv(cov)
    log_term = (
        -0.5 * (cov_inv[0, 0] * d1**2 + 2 * cov_inv[0, 1] * d1 * d2 + cov_inv[1, 1] * d2**2)
        - math.log(2 * math.pi)
        - 0.5 * math.log(np.linalg.det(cov))
        + quad[0, 0] * p1**2 + 2 * quad[0, 1] * p1 * p2 + quad[1, 1] * p2**2
    )
    values = np.exp(log_term)
    if modulation is not None:
        values = values * modulation(p1, p2)
    jac = abs(np.linalg.det(transform))
    return jac * float(np.trapezoid(np.trapezoid(values, grid, axis=1), grid))


# ------------------------------------------------------------- classical ---

def test_classical_thermal_gaussian_value():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=0.7, p2bar=1.4)
    pred = ft_classical(state, params)
    assert pred.value == pytest.approx(2.0, rel=1e-15)
    assert pred.valid
    assert pred.condition_margin == pytest.approx(0.25, rel=1e-15)


def test_classical_value_is_preparation_independent():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=0.6)
    values = set()
    for sigma2, p2bar in [(0.1, 0.0), (3.0, 2.0), (0.5, -4.0)]:
        state = ClassicalThermalGaussian.from_params(params, sigma2=sigma2, p2bar=p2bar)
        values.add(ft_classical(state, params).value)
    for delta2 in (0.2, 1.0, 7.0):
        state = ClassicalThermalThermal.from_params(params, delta2=delta2)
        values.add(ft_classical(state, params).value)
    assert values == {2.0}


def test_classical_correlated_values_and_divergence():
    params = ModelParams(m1=1.0, m2=1.0, k=1.0)
    state = ClassicalMomentumCorrelated.from_params(params, c=2.0)
    pred = ft_classical(state, params)
    assert pred.value == pytest.approx(0.5, rel=1e-15)
    # critical correlation c = (m2 - m1)/(2 m1) kills the denominator
    params2 = ModelParams(m1=1.0, m2=3.0, k=1.0)
    critical = ClassicalMomentumCorrelated.from_params(params2, c=1.0)
    pred2 = ft_classical(critical, params2)
    assert not pred2.valid
    assert pred2.condition_margin <= 0.0
    assert math.isinf(pred2.value)


def test_classical_equal_mass_divergence():
    params = ModelParams(m1=2.0, m2=2.0, k=1.0)
    pred = ft_classical(ClassicalThermalGaussian.from_params(params, sigma2=1.0), params)
    assert not pred.valid and math.isinf(pred.value)


def test_classical_monte_carlo_spot_check_against_reference():
    # delta-line expectation, integrated directly
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    c = 1.8
    state = ClassicalMomentumCorrelated.from_params(params, c=c)
    grid = np.linspace(-40, 40, 400001)
    m1, m2, M = params.m1, params.m2, params.total_mass
    work = (2 / M**2) * (m1 * c * grid - m2 * grid) * (grid + c * grid)
    density = np.exp(-(grid**2) / 2) / math.sqrt(2 * math.pi)
    direct = np.trapezoid(np.exp(-work) * density, grid)
    assert ft_classical(state, params).value == pytest.approx(direct, rel=1e-8)


# --------------------------------------------------------------- quantum ---

@functools.lru_cache(maxsize=1)
def quantum_cases():
    rng = np.random.default_rng(20240901)
    cases = []
    while len(cases) < 24:
        m1 = rng.uniform(0.5, 2.0)
        m2 = rng.uniform(2.5, 6.0)
        beta1 = rng.uniform(0.5, 2.0)
        params = ModelParams(m1=m1, m2=m2, k=1.0, beta1=beta1)
        d1 = params.delta1
        eps = rng.uniform(0.03, 0.35)
        gamma = rng.uniform(0.05, 0.5)
        sigma1 = eps * d1
        sigma2 = gamma * d1**2 / sigma1
        variant = len(cases) % 6
        if variant == 0:
            state = QuantumThermalGaussian(d1, sigma1, sigma2, p2bar=rng.uniform(-1.5, 1.5) * d1)
        elif variant == 1:
            state = QuantumThermalThermal(d1, sigma1, sigma2, delta2=rng.uniform(0.2, 1.2) * d1)
        elif variant == 2:
            state = MomentumCorrelated(d1, eps * d1, c=rng.uniform(0.0, 1.5))
        elif variant == 3:
            eta = rng.uniform(0.3, 6.0)
            state = AgentSuperposition(
                d1, sigma1, sigma2, dx=eta / (2 * sigma2),
                p2bar=rng.uniform(-1.5, 1.5) * d1,
            )
        elif variant == 4:
            state = EntangledPair(d1, sigma1, sigma2, corr=1.0 / (2 * rng.uniform(0.3, 4.0) * sigma1 * sigma2))
        else:
            state = PositionCorrelated(d1, sigma1, sigma2, corr=rng.uniform(0.1, 3.0))
        pred = ft_quantum(state, params)
        if pred.valid and pred.condition_margin > 0.1:
            cases.append((state, params, pred))
    return cases


def test_quantum_closed_forms_match_exact_gaussian_expectation():
    # the gaussian-envelope families admit an exact matrix reference
    for state, params, pred in quantum_cases():
        mean, cov, modulation = gaussian_envelope(state)
        if modulation is not None:
            continue  # superposition handled by the trapezoid reference below
        reference = gauss_expect(work_quad(params), mean, cov)
        assert pred.value == pytest.approx(reference, rel=1e-12), state.variant


def test_superposition_closed_form_matches_trapezoid_reference():
    count = 0
    for state, params, pred in quantum_cases():
        if state.variant != "superpos":
            continue
        reference = reference_value(state, params)
        assert pred.value == pytest.approx(reference, rel=1e-9)
        count += 1
    assert count >= 3


def test_quantum_tg_centroid_factor():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    base = ft_quantum(QuantumThermalGaussian(1.0, 0.2, 0.8, p2bar=0.0), params)
    shifted = ft_quantum(QuantumThermalGaussian(1.0, 0.2, 0.8, p2bar=1.3), params)
    disc = base.helpers["disc"]
    expected = math.exp(2 * 1.0 * 0.2**2 * 1.3**2 / disc)
    assert shifted.value / base.value == pytest.approx(expected, rel=1e-12)


def test_quantum_classical_limit_tg():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    state = QuantumThermalGaussian(1.0, 1e-4, 1e-4, p2bar=0.7)
    quantum = ft_quantum(state, params).value
    classical = ft_classical(ClassicalThermalGaussian.from_params(params, sigma2=1.0), params).value
    assert abs(quantum - classical) / classical <= 1e-3


def test_quantum_tt_convergence_can_fail_for_hot_agent():
    # a sufficiently hot agent pushes the thermal-thermal average past its
    # convergence boundary at finite eps
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    cold = ft_quantum(QuantumThermalThermal(1.0, 0.3, 0.3, delta2=0.5), params)
    assert cold.valid
    hot = ft_quantum(QuantumThermalThermal(1.0, 0.3, 0.3, delta2=12.0), params)
    assert not hot.valid and hot.condition_margin <= 0.0


def test_momentum_correlated_limits():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    classical = ft_classical(ClassicalMomentumCorrelated.from_params(params, c=0.8), params)
    gaps = []
    for eps in (1e-1, 1e-2, 1e-3):
        state = MomentumCorrelated(1.0, eps, c=0.8)
        gaps.append(abs(ft_quantum(state, params).value - classical.value))
    assert gaps[0] > gaps[1] > gaps[2]
    # quadratic approach to the classical value
    assert gaps[1] / gaps[2] == pytest.approx(100.0, rel=0.1)
    assert gaps[2] <= 1e-3


def test_entangled_uncorrelated_limit_equals_position_correlated():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    entangled = ft_quantum(EntangledPair(1.0, 0.2, 0.8, corr=0.0), params)
    position = ft_quantum(PositionCorrelated(1.0, 0.2, 0.8, corr=5.0), params)
    assert entangled.value == pytest.approx(position.value, rel=1e-14)
    base = entangled.helpers["base_disc"]
    assert entangled.value == pytest.approx(4.0 / math.sqrt(base), rel=1e-14)


def test_position_correlated_is_strength_independent():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    values = {
        ft_quantum(PositionCorrelated(1.0, 0.2, 0.8, corr=c), params).value
        for c in (0.0, 0.5, 2.0, 9.0)
    }
    assert len(values) == 1


def test_superposition_factorisation():
    # ratio to the thermal-gaussian value depends only on the interference data
    params = ModelParams(m1=1.0, m2=4.0, k=1.0, beta1=1.0)
    tg = ft_quantum(QuantumThermalGaussian(1.0, 0.25, 0.9, p2bar=0.8), params)
    sup = ft_quantum(AgentSuperposition(1.0, 0.25, 0.9, dx=1.7, p2bar=0.8), params)
    h = sup.helpers
    expected = (1 + math.exp(-h["decay_boost"] * h["eta"] ** 2 / 8) * math.cos(h["phase"])) / (
        1 + math.exp(-h["eta"] ** 2 / 8)
    )
    assert sup.value / tg.value == pytest.approx(expected, rel=1e-12)
    assert sup.value > 0.0


def test_superposition_large_eta_approaches_gaussian():
    params = ModelParams(m1=1.0, m2=4.0, k=1.0, beta1=1.0)
    tg = ft_quantum(QuantumThermalGaussian(1.0, 0.25, 0.9, p2bar=0.8), params)
    sup = ft_quantum(AgentSuperposition(1.0, 0.25, 0.9, dx=40.0, p2bar=0.8), params)
    eta = sup.helpers["eta"]
    assert abs(sup.value - tg.value) / tg.value <= 2 * math.exp(-(eta**2) / 8) + 1e-12


# ---------------------------------------------------------------- approx ---

def test_first_order_backaction_form():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = QuantumThermalGaussian(1.0, 1e-6, 1e-2)
    pred = ft_quantum_approx(state, params, "eps_first_order")
    gamma = state.gamma
    expected = 4.0 / 2.0 * backaction_factor(gamma, 1.0, 3.0)
    assert pred.value == pytest.approx(expected, rel=1e-12)
    tiny_gamma = ft_quantum_approx(QuantumThermalGaussian(1.0, 1e-6, 1e-7), params,
                                   "eps_first_order")
    assert tiny_gamma.value == pytest.approx(2.0, rel=1e-9)


def test_first_order_accuracy_scaling():
    # the gap between exact and first-order values shrinks quadratically in eps
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    gamma = 0.3
    gaps = []
    eps_grid = (1e-2, 1e-3, 1e-4)
    for eps in eps_grid:
        sigma1 = eps * 1.0
        sigma2 = gamma / eps
        state = QuantumThermalGaussian(1.0, sigma1, sigma2)
        exact = ft_quantum(state, params).value
        approx = ft_quantum_approx(state, params, "eps_first_order").value
        gaps.append(abs(exact - approx))
    slope = np.polyfit(np.log(eps_grid), np.log(gaps), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)
    for eps, gap in zip(eps_grid, gaps):
        assert gap <= 10.0 * eps


def test_delocalised_regime_recovers_classical():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    for state in (
        QuantumThermalGaussian(1.0, 0.01, 0.5),
        QuantumThermalThermal(1.0, 0.01, 0.5, delta2=0.4),
    ):
        pred = ft_quantum_approx(state, params, "eps_ll_gamma_ll_1")
        assert pred.value == pytest.approx(2.0, rel=1e-14)


def test_equal_mass_momentum_correlated_identity():
    params = ModelParams(m1=1.5, m2=1.5, k=1.0, beta1=0.8)
    c = 2.5
    state = MomentumCorrelated(params.delta1, 0.05 * params.delta1, c=c)
    pred = ft_quantum_approx(state, params, "eps_ll_1")
    beta2 = (params.beta1 / c**2) * (params.m2 / params.m1)
    assert pred.value == pytest.approx(1.0 / c, rel=1e-14)
    assert pred.value == pytest.approx(math.sqrt(beta2 / params.beta1), rel=1e-14)


def test_superposition_approx_forms():
    params = ModelParams(m1=1.0, m2=4.0, k=1.0)
    state = AgentSuperposition(1.0, 0.01, 10.0, dx=0.15)
    thermal = ft_quantum_approx(state, params, "eps_ll_1")
    assert thermal.value == pytest.approx(5.0 / 3.0, rel=1e-14)
    sharp = ft_quantum_approx(state, params, "eps_ll_gamma_ll_1")
    h = sharp.helpers
    assert sharp.value == pytest.approx(
        (5.0 / 3.0) * h["backaction"] * h["attenuation"], rel=1e-12
    )
    # against the exact value in its regime of validity
    exact = ft_quantum(state, params)
    assert abs(sharp.value - exact.value) / exact.value <= 5e-3


def test_correlated_approx_forms_against_exact():
    params = ModelParams(m1=1.0, m2=4.0, k=1.0)
    for make in (
        lambda eps: EntangledPair(1.0, eps, 1.0 / (2 * eps), corr=1.0),
        lambda eps: PositionCorrelated(1.0, eps, 1.0 / (2 * eps), corr=1.0),
    ):
        gaps = []
        for eps in (0.05, 0.01):
            state = make(eps)
            exact = ft_quantum(state, params).value
            approx = ft_quantum_approx(state, params, "eps_ll_1").value
            gaps.append(abs(exact - approx) / exact)
        assert gaps[1] < gaps[0]
        assert gaps[1] <= 2e-3


def test_hbar_independence_of_position_correlated_approx():
    # rescaling hbar at fixed sigma1*sigma2 leaves the classical-limit value
    # untouched; the entangled counterpart moves
    sigma1, sigma2, corr = 0.05, 2.0, 1.0 / (2 * 0.05 * 2.0)  # theta = 1 at hbar = 1
    values_pos, values_ent = [], []
    for hbar in (1.0, 10.0):
        params = ModelParams(m1=1.0, m2=4.0, k=1.0, beta1=1.0, hbar=hbar)
        pos = PositionCorrelated(1.0, sigma1, sigma2, corr=corr, hbar=hbar)
        ent = EntangledPair(1.0, sigma1, sigma2, corr=corr, hbar=hbar)
        values_pos.append(ft_quantum_approx(pos, params, "eps_ll_1").value)
        values_ent.append(ft_quantum_approx(ent, params, "eps_ll_1").value)
    assert abs(values_pos[1] - values_pos[0]) / values_pos[0] <= 1e-10
    assert abs(values_ent[1] - values_ent[0]) / values_ent[0] > 1e-3


def test_regime_unavailable():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    with pytest.raises(RegimeUnavailable):
        ft_quantum_approx(MomentumCorrelated(1.0, 0.1, c=0.5), params, "eps_first_order")
    with pytest.raises(RegimeUnavailable):
        ft_quantum_approx(QuantumThermalGaussian(1.0, 0.1, 0.5), params, "bogus")


# ------------------------------------------------------------ attenuation ---

def test_attenuation_surface_properties():
    gamma = 0.25
    eta = np.linspace(0.0, 6.0, 25)
    ratio = np.linspace(0.02, 0.66, 25)
    surface = xi_surface(gamma, eta, ratio)
    assert np.all(surface > 0.0) and np.all(surface <= 1.0)
    np.testing.assert_allclose(surface[0], 1.0, atol=1e-15)        # eta = 0
    assert np.all(np.diff(surface, axis=1) <= 1e-15)               # falling in ratio
    for i, e in enumerate(eta):
        assert np.all(np.abs(surface[i] - 1.0) <= math.exp(-(e**2) / 8) + 1e-15)


def test_attenuation_domain_errors():
    with pytest.raises(DomainError):
        xi_surface(0.25, [1.0], [0.7])     # beyond 1/(1+2*gamma) = 2/3
    with pytest.raises(DomainError):
        xi_surface(-1.0, [1.0], [0.5])
    with pytest.raises(DomainError):
        attenuation_factor(0.25, 1.0, 0.8)
    assert attenuation_factor(0.25, 0.0, 0.5) == 1.0


# ----------------------------------------------------------------- jensen ---

def test_jensen_bound_values():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    pred = ft_classical(ClassicalThermalGaussian.from_params(params, sigma2=1.0), params)
    assert jensen_bound(pred, 1.0) == pytest.approx(-math.log(2.0), rel=1e-15)
    from flucto.closed_forms import FtPrediction
    unit = FtPrediction(1.0, True, 1.0, "test")
    assert jensen_bound(unit, 2.0) == 0.0
    bad = FtPrediction(math.inf, False, -0.5, "test")
    with pytest.raises(ValueError):
        jensen_bound(bad, 1.0)


def test_helpers_are_complete():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    sup = ft_quantum(AgentSuperposition(1.0, 0.2, 0.8, dx=1.0, p2bar=0.5), params)
    for key in ("eps", "gamma", "eta", "base_disc", "disc", "decay_boost", "phase"):
        assert key in sup.helpers
    ent = ft_quantum(EntangledPair(1.0, 0.2, 0.8, corr=1.0), params)
    for key in ("eps", "gamma", "theta", "base_disc", "disc"):
        assert key in ent.helpers


def test_state_params_consistency_enforced():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    with pytest.raises(ValueError):
        ft_quantum(QuantumThermalGaussian(2.0, 0.2, 0.8), params)  # delta1 mismatch
