import math

import pytest

from flucto import (
    ClassicalMomentumCorrelated,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
    EntangledPair,
    ModelParams,
    MomentumCorrelated,
    NonIntegrable,
    ProcessInterval,
    QuadratureConfig,
    QuantumThermalGaussian,
    QuantumThermalThermal,
    estimate_mc,
    estimate_quadrature,
    ft_classical,
    ft_quantum,
    jensen_bound,
    mean_work,
)
from flucto.estimators import _tensor_integral, _work_quadratic
from flucto.states_quantum import gaussian_envelope, momentum_mean_cov

HALF_PERIOD = ProcessInterval(v=1)


def test_mc_reproduces_thermal_gaussian_value():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=1.0)
    est = estimate_mc(state, params, HALF_PERIOD, n=10**6, seed=1)
    assert abs(est.value - 2.0) <= 3 * est.error
    assert est.method == "monte_carlo"
    assert not est.diverged


def test_mc_reproduces_correlated_value():
    params = ModelParams(m1=1.0, m2=1.0, k=1.0, beta1=1.0)
    state = ClassicalMomentumCorrelated.from_params(params, c=2.0)
    est = estimate_mc(state, params, HALF_PERIOD, n=10**6, seed=2)
    assert abs(est.value - 0.5) <= 3 * est.error


def test_mc_zero_beta_is_exactly_one():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=1.0)
    est = estimate_mc(state, params, HALF_PERIOD, n=10**4, seed=0, beta=0.0)
    assert est.value == 1.0
    assert est.error == 0.0
    assert est.ess == pytest.approx(10**4)


def test_mc_requires_minimum_samples():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=1.0)
    with pytest.raises(ValueError):
        estimate_mc(state, params, HALF_PERIOD, n=100, seed=0)


def test_mc_deterministic_across_threads():
    params = ModelParams(m1=1.0, m2=8.0, k=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=0.7)
    single = estimate_mc(state, params, HALF_PERIOD, n=3 * 10**5, seed=5, threads=1)
    multi = estimate_mc(state, params, HALF_PERIOD, n=3 * 10**5, seed=5, threads=4)
    assert single.value == multi.value
    assert single.error == multi.error


def test_mc_generic_time_agrees_with_half_period():
    params = ModelParams(m1=1.0, m2=8.0, k=1.3)
    state = ClassicalThermalGaussian.from_params(params, sigma2=0.7)
    a = estimate_mc(state, params, HALF_PERIOD, n=10**5, seed=9)
    b = estimate_mc(state, params, ProcessInterval(t=params.tau), n=10**5, seed=9)
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_mc_consistency_over_seeds():
    # z <= 4 in at least 99 of 100 seeded runs, for every classical family
    cases = [
        (ModelParams(m1=1.0, m2=8.0, k=1.0), lambda p: ClassicalThermalGaussian.from_params(p, sigma2=0.8)),
        (ModelParams(m1=1.0, m2=8.0, k=1.0), lambda p: ClassicalThermalThermal.from_params(p, delta2=1.3)),
        (ModelParams(m1=1.0, m2=1.0, k=1.0), lambda p: ClassicalMomentumCorrelated.from_params(p, c=2.0)),
    ]
    for params, make in cases:
        state = make(params)
        target = ft_classical(state, params).value
        ok = 0
        for seed in range(100):
            est = estimate_mc(state, params, HALF_PERIOD, n=2 * 10**4, seed=seed)
            if abs(est.value - target) <= 4 * est.error:
                ok += 1
        assert ok >= 99, (state.variant, ok)


def test_mc_flags_divergent_average():
    params = ModelParams(m1=2.0, m2=2.0, k=1.0)
    state = ClassicalThermalGaussian.from_params(params, sigma2=1.0)
    est = estimate_mc(state, params, HALF_PERIOD, n=10**4, seed=0)
    assert est.diverged


def test_mc_flags_effective_sample_collapse():
    # just inside the convergence boundary the weights concentrate brutally:
    # effective sample sizes drop by orders of magnitude, and runs that fall
    # below ~10 effective samples are flagged rather than silently reported
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    healthy = ClassicalMomentumCorrelated.from_params(params, c=4.0)
    critical = ClassicalMomentumCorrelated.from_params(params, c=1.01)
    ess_healthy = estimate_mc(healthy, params, HALF_PERIOD, n=10**4, seed=1).ess
    near = estimate_mc(critical, params, HALF_PERIOD, n=10**4, seed=1)
    assert near.ess < ess_healthy / 50.0
    assert near.ess < 10.0
    assert near.diverged


# ------------------------------------------------------------- quadrature ---

def test_quadrature_matches_closed_forms_spot():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    states = [
        QuantumThermalGaussian(1.0, 0.2, 0.8, p2bar=0.9),
        QuantumThermalThermal(1.0, 0.2, 0.8, delta2=0.6),
        MomentumCorrelated(1.0, 0.1, c=1.5),
        EntangledPair(1.0, 0.2, 0.8, corr=1.1),
    ]
    for state in states:
        closed = ft_quantum(state, params)
        est = estimate_quadrature(state, params)
        assert abs(est.value - closed.value) / closed.value <= 1e-9, state.variant
        assert est.error <= 1e-6


def test_quadrature_rejects_divergent_state():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = QuantumThermalGaussian(1.0, 0.9, 3.0)  # far beyond convergence
    assert not ft_quantum(state, params).valid
    with pytest.raises(NonIntegrable):
        estimate_quadrature(state, params)
    flagged = estimate_quadrature(state, params, on_divergence="flag")
    assert flagged.diverged and math.isinf(flagged.value)


def test_quadrature_refinement_convergence():
    # doubling the node count shrinks the change by well over an order of
    # magnitude while the rule is still resolving the integrand
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = QuantumThermalGaussian(1.0, 0.25, 0.9, p2bar=0.7)
    mean, cov, modulation = gaussian_envelope(state)
    quad = _work_quadratic(params, params.beta1)
    values = [
        _tensor_integral(mean, cov, quad, None, modulation, nodes, 6.0)
        for nodes in (9, 17, 33)
    ]
    change_coarse = abs(values[1] - values[0])
    change_fine = abs(values[2] - values[1])
    assert change_coarse >= 10.0 * change_fine


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(radius=4.0)
    with pytest.raises(ValueError):
        QuadratureConfig(nodes=100)
    with pytest.raises(ValueError):
        QuadratureConfig(levels=1)


# -------------------------------------------------------------- mean work ---

def test_mean_work_heavy_agent_delivers_energy():
    # a heavy thermal agent with a drift can only hand energy to the receiver
    params = ModelParams(m1=1.0, m2=1000.0, k=1.0, beta1=1.0)
    sigma2 = math.sqrt(params.m2 / params.beta1)  # same temperature as receiver
    state = ClassicalThermalGaussian.from_params(params, sigma2=sigma2, p2bar=100.0)
    est = mean_work(state, params, HALF_PERIOD, n=10**5, seed=4)
    assert est.value >= -3 * est.error
    assert est.value > 0


def test_mean_work_symmetric_state_vanishes():
    params = ModelParams(m1=1.4, m2=1.4, k=1.0, beta1=1.0)
    state = ClassicalThermalThermal.from_params(params, delta2=params.delta1)
    est = mean_work(state, params, HALF_PERIOD, n=2 * 10**5, seed=8)
    assert abs(est.value) <= 4 * est.error


def test_mean_work_quantum_matches_moments():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0)
    state = QuantumThermalGaussian(1.0, 0.2, 0.8, p2bar=1.1)
    est = mean_work(state, params)
    mean, cov = momentum_mean_cov(state)
    m1, m2, M = params.m1, params.m2, params.total_mass
    e_p1p2 = cov[0, 1] + mean[0] * mean[1]
    e_p1sq = cov[0, 0] + mean[0] ** 2
    e_p2sq = cov[1, 1] + mean[1] ** 2
    expected = (2 / M**2) * (m1 * (e_p1p2 + e_p2sq) - m2 * (e_p1sq + e_p1p2))
    assert est.value == pytest.approx(expected, rel=1e-10)


def test_jensen_inequality_holds_jointly():
    params = ModelParams(m1=1.0, m2=3.0, k=1.0, beta1=1.0)
    classical = ClassicalThermalGaussian.from_params(params, sigma2=0.9, p2bar=0.4)
    bound = jensen_bound(ft_classical(classical, params), params.beta1)
    est = mean_work(classical, params, HALF_PERIOD, n=2 * 10**5, seed=6)
    assert est.value >= bound - 3 * est.error

    quantum = QuantumThermalGaussian(1.0, 0.2, 0.8, p2bar=0.4)
    qbound = jensen_bound(ft_quantum(quantum, params), params.beta1)
    qest = mean_work(quantum, params)
    assert qest.value >= qbound - 1e-9
