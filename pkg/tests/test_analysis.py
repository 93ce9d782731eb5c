from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import binary_moment_quadrature
from ppbell.analysis import (
    DILUTION,
    CalibrationError,
    EmptySample,
    Verdict,
    bell_closed_form,
    bell_qm_prediction,
    bootstrap_errors,
    chsh_sum,
    classify,
    estimate_correlation,
    evaluate_bell,
    evaluate_wigner,
    self_calibrate_analyzing_power,
    verdict,
    weighted_mean,
    wigner_closed_form,
    wigner_probability,
    wigner_qm_prediction,
)
from ppbell.cases import BELL_CASES, WIGNER_CASES, WignerCase, bell_case, wigner_case
from ppbell.events import EventBatch
from ppbell.polarimeter import AnalyzerConfig, sample_scatter
from ppbell.spin_models import (
    SOURCE_CODES,
    MeasurementAxis,
    SourceKind,
    SourceModelSpec,
    estimator_expectation,
    lhv_deterministic_expectation,
    lhv_vector_expectation,
    separation_deg,
)

A = 0.25
NUCLEAR_ONLY = AnalyzerConfig(analyzing_power=A, coulomb_fraction=0.0)


def scattered(kind, n, seed, response="sign", analyzer=NUCLEAR_ONLY):
    ev = EventBatch.allocate(n)
    ev.spin_model[:] = SOURCE_CODES[SourceKind(kind)]
    rng = np.random.default_rng(seed)
    if kind in ("lhv_vector", "lhv_deterministic"):
        ev.hidden_deg = rng.uniform(0, 360, n)
    return sample_scatter(ev, analyzer, rng, response)


@pytest.fixture(scope="module")
def singlets():
    return scattered("quantum_singlet", 1_000_000, 101)


def test_dilution_factor_against_quadrature():
    rng = np.random.default_rng(6)
    for _ in range(50):
        a, b = rng.uniform(0, 360, 2)
        amp = rng.uniform(0.05, 1.0)
        expected = DILUTION**2 * amp**2 * -np.cos(np.deg2rad(a - b))
        assert binary_moment_quadrature(a, b, amp) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("phi, axis, s", [(0, 0, 1), (180, 0, -1), (90, 0, 1), (270, 0, 1), (90.0001, 0, -1),
                                          (10, 100, 1), (359, 180, -1)])
def test_classify(phi, axis, s):
    assert classify(phi, axis) == s


def test_weighted_mean_unit_weights():
    x = np.r_[np.ones(70), -np.ones(30)]
    m, err = weighted_mean(x)
    assert m == pytest.approx(0.4)
    assert err == pytest.approx(np.sqrt((1 - 0.4**2) / 100))
    with pytest.raises(EmptySample):
        weighted_mean([])


@pytest.mark.parametrize("theta, expected", [(0.0, -1.0), (60.0, -0.5)])
def test_singlet_correlation(singlets, theta, expected):
    est = estimate_correlation(singlets, 17.0, 17.0 + theta, A)
    assert abs(est.e_value - expected) < 3 * est.sigma
    assert sum(est.counts.values()) == pytest.approx(len(singlets))


def test_unpolarized_correlation_is_zero():
    est = estimate_correlation(scattered("unpolarized", 500_000, 102), 0.0, 0.0, A)
    assert abs(est.e_value) < 3 * est.sigma


def test_zero_analyzing_power_gives_null_correlations():
    ev = scattered("quantum_singlet", 500_000, 103, analyzer=AnalyzerConfig(analyzing_power=0.0))
    for theta in (0.0, 45.0, 90.0):
        est = estimate_correlation(ev, 0.0, theta, A)
        assert abs(est.e_value) < 3 * est.sigma


def test_estimator_errors():
    with pytest.raises(CalibrationError):
        estimate_correlation((np.zeros(3), np.zeros(3)), 0, 0, 0.0)
    with pytest.raises(EmptySample):
        estimate_correlation((np.zeros(0), np.zeros(0)), 0, 0, A)


def test_self_calibration(singlets):
    res = self_calibrate_analyzing_power(singlets)
    assert res.ok and abs(res.a_est - A) < 3 * res.sigma


def test_self_calibration_fails_on_unpolarized():
    res = self_calibrate_analyzing_power(scattered("unpolarized", 200_000, 104))
    # near A = 0 the square root makes sigma_A meaningless; test A^2/2 against the moment error
    assert not res.ok or res.a_est**2 / 2 < 3 * res.moment_sigma
    assert abs(res.moment) < 3 * res.moment_sigma


def test_self_calibration_makes_vector_lhv_look_quantum():
    # the singlet assumption inside self-calibration returns A/sqrt(2) for this source
    ev = scattered("lhv_vector", 1_000_000, 105)
    res = self_calibrate_analyzing_power(ev)
    assert abs(res.a_est - A / np.sqrt(2)) < 3 * res.sigma


def test_wigner_probability_examples(singlets):
    assert wigner_probability(SimpleNamespace(e_value=-1.0, sigma=0.1))[0] == 0.0
    assert wigner_probability(SimpleNamespace(e_value=0.0, sigma=0.1)) == (0.5, 0.05)
    p, s = wigner_probability(estimate_correlation(singlets, 0.0, 90.0, A))
    assert abs(p - 0.5) < 3 * s


def test_bell_closed_form_examples():
    assert bell_qm_prediction(bell_case(1)) == pytest.approx(2.46, abs=0.005)
    assert bell_qm_prediction(bell_case(8)) == pytest.approx(2.50, abs=0.005)
    assert bell_closed_form(bell_case(8), lhv_deterministic_expectation) == pytest.approx(2.0, abs=1e-12)
    for case in BELL_CASES:
        assert case.qm_prediction == pytest.approx(bell_qm_prediction(case), abs=0.005)


def test_wigner_closed_form_examples():
    assert wigner_qm_prediction(wigner_case(3)) == pytest.approx(0.2071, abs=1e-4)
    assert wigner_qm_prediction(wigner_case(6)) == pytest.approx(0.0, abs=1e-12)
    for case in WIGNER_CASES:
        assert wigner_closed_form(case, lhv_deterministic_expectation) == pytest.approx(0.0, abs=1e-12)


def test_lhv_closed_form_chsh_bound_random_quadruples():
    rng = np.random.default_rng(7)
    for a, b, ap, bp in rng.uniform(0, 360, (10_000, 4)):
        pairs = [(a, b), (a, bp), (ap, b), (ap, bp)]
        for fn in (lhv_deterministic_expectation, lhv_vector_expectation):
            assert chsh_sum(*(fn(separation_deg(x, y)) for x, y in pairs)) <= 2.0 + 1e-12


def test_lhv_closed_form_wigner_bound_random_triples():
    rng = np.random.default_rng(8)
    for a, half in zip(rng.uniform(0, 360, 10_000), rng.uniform(0, 180, 10_000)):
        case = WignerCase(0, a, a + half, a + 2 * half, 0.0, 0.0)
        det = wigner_closed_form(case, lhv_deterministic_expectation)
        assert det <= 1e-12
        if half <= 90.0:
            assert det == pytest.approx(0.0, abs=1e-12)
        assert wigner_closed_form(case, lhv_vector_expectation) <= 1e-12


def _est(case_pairs, values, sigma=0.1):
    return [SimpleNamespace(axis_a=MeasurementAxis(x), axis_b=MeasurementAxis(y), e_value=v, sigma=sigma)
            for (x, y), v in zip(case_pairs, values)]


def test_evaluate_bell_sign_convention_and_sigma():
    case = bell_case(5)
    res = evaluate_bell(case, _est(case.axis_pairs, [-0.7071, 0.7071, -0.7071, -0.7071]))
    assert res.measured == pytest.approx(2.8284, abs=1e-4)
    assert res.sigma == pytest.approx(0.2)
    assert res.verdict is Verdict.VIOLATES_CLASSICAL
    with pytest.raises(ValueError):
        evaluate_bell(case, _est(bell_case(4).axis_pairs, [0, 0, 0, 0]))
    with pytest.raises(ValueError):
        evaluate_bell(case, _est(case.axis_pairs[:3], [0, 0, 0]))


def test_evaluate_wigner():
    res = evaluate_wigner(wigner_case(2), [(0.25, 0.03), (0.067, 0.04), (0.067, 0.0)])
    assert res.measured == pytest.approx(0.116)
    assert res.sigma == pytest.approx(0.05)
    assert res.prediction_qm == pytest.approx(0.116025, abs=1e-6)


@pytest.mark.parametrize("measured, sigma, expected", [
    (2.5, 0.1, Verdict.VIOLATES_CLASSICAL), (2.1, 0.1, Verdict.INCONCLUSIVE),
    (1.5, 0.1, Verdict.CONSISTENT), (2.2, 0.1, Verdict.VIOLATES_CLASSICAL),
])
def test_verdict(measured, sigma, expected):
    assert verdict(measured, sigma, 2.0) is expected


def test_bootstrap_constant_and_minimum():
    phi = (np.zeros(100), np.zeros(100))
    assert bootstrap_errors(phi, lambda s: 1.0, 50, np.random.default_rng(0)) == 0.0
    with pytest.raises(ValueError):
        bootstrap_errors(phi, lambda s: 1.0, 10, np.random.default_rng(0))


def test_bootstrap_agrees_with_propagation_and_scales(singlets):
    def e90(sample):
        return estimate_correlation(sample, 0.0, 90.0, A).e_value

    small = (singlets.phi1[:100_000], singlets.phi2[:100_000])
    large = (singlets.phi1[:200_000], singlets.phi2[:200_000])
    boot = bootstrap_errors(small, e90, 200, np.random.default_rng(9))
    prop = estimate_correlation(small, 0.0, 90.0, A).sigma
    assert 0.75 <= boot / prop <= 1.25
    boot2 = bootstrap_errors(large, e90, 200, np.random.default_rng(10))
    assert boot / boot2 == pytest.approx(np.sqrt(2), rel=0.15)


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 360))
def test_axis_offset_invariance(delta):
    ev = scattered("quantum_singlet", 200_000, 106)
    e0 = estimate_correlation(ev, 0.0, 40.0, A)
    e1 = estimate_correlation(ev, delta, 40.0 + delta, A)
    assert abs(e0.e_value - e1.e_value) < 3 * np.hypot(e0.sigma, e1.sigma)


MODELS = [
    SourceModelSpec("quantum_singlet"),
    SourceModelSpec("lhv_vector"),
    SourceModelSpec("lhv_deterministic", "sign"),
    SourceModelSpec("lhv_deterministic", "cosine"),
    SourceModelSpec("unpolarized"),
]


@pytest.mark.parametrize("model", MODELS, ids=lambda m: f"{m.kind.value}-{m.response.value}")
def test_monte_carlo_matches_estimator_expectation_on_grid(model):
    ev = scattered(model.kind.value, 1_000_000, 19, model.response.value)
    for theta in np.arange(0.0, 181.0, 10.0):
        est = estimate_correlation(ev, 0.0, theta, A)
        expected = estimator_expectation(model, theta)
        assert abs(est.e_value - expected) < 3 * est.sigma, (theta, est.e_value, expected, est.sigma)
