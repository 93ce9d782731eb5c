"""Acceptance criteria, each at its stated tolerance.

Every check records a line through the ``acceptance`` fixture; the summary
at the end of the pytest run prints one PASS/FAIL line per criterion.
Monte Carlo seeds were fixed before the first run.
"""

import time

import numpy as np
import pytest

from oracles import binary_moment_quadrature, random_true_window_fraction
from ppbell.analysis import (
    DILUTION,
    bell_closed_form,
    bell_from_events,
    chsh_sum,
    estimate_correlation,
    self_calibrate_analyzing_power,
    wigner_closed_form,
    wigner_from_events,
    wigner_qm_prediction,
)
from ppbell.cases import BELL_CASES, WIGNER_CASES
from ppbell.config import AnalysisOptions, RunConfig
from ppbell.events import Channel
from ppbell.generator import generate_range
from ppbell.kinematics import (
    energy_sum_spectrum,
    four_vector,
    PROTON_MASS_MEV,
    boost,
    relative_kinetic_energy,
    selection_mask,
)
from ppbell.pipeline import dumps, run_pipeline, selected_sample
from ppbell.polarimeter import AnalyzerConfig
from ppbell.spin_models import (
    SourceModelSpec,
    lhv_deterministic_expectation,
    lhv_vector_expectation,
    separation_deg,
)
from ppbell.timing import Coincidence, TimingConfig, classify_coincidence, delta_t_spectrum

A = 0.25
# ~22.6% of generated pairs survive timing, kinematic and scatter cuts
BELL_EVENTS = 4_500_000       # -> about 1.0e6 selected pairs
WIGNER_EVENTS = 18_000_000    # -> about 4.0e6 selected pairs
SELECTED_MIN_BELL = 1_000_000
SELECTED_MIN_WIGNER = 4_000_000

slow = pytest.mark.slow


def run_sample(kind, n_events, seed, analyzing_power=A, **timing):
    cfg = RunConfig(seed=seed, n_events=n_events, source=SourceModelSpec(kind),
                    analyzer=AnalyzerConfig(analyzing_power=analyzing_power),
                    timing=TimingConfig(**timing))
    t0 = time.perf_counter()
    accepted, weights = selected_sample(cfg)
    return {"angles": (accepted.phi1, accepted.phi2), "weights": weights,
            "n": len(accepted), "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def qm_bell():
    return run_sample("quantum_singlet", BELL_EVENTS, 2001)


@pytest.fixture(scope="module")
def lhv_vector_bell():
    return run_sample("lhv_vector", BELL_EVENTS, 2002)


@pytest.fixture(scope="module")
def lhv_det_bell():
    return run_sample("lhv_deterministic", BELL_EVENTS, 2003)


def fmt(r):
    return f"{r.measured:.3f}±{r.sigma:.3f}"


# 1 ---------------------------------------------------------------------------

def test_c1_table1_qm_column(acceptance):
    title = "reference Bell table QM column from closed form (±0.005, <1 s)"
    t0 = time.perf_counter()
    table = [2.46, 2.60, 2.72, 2.80, 2.83, 2.79, 2.69, 2.50]
    values = [bell_closed_form(c, lambda t: -np.cos(np.deg2rad(t))) for c in BELL_CASES]
    dt = time.perf_counter() - t0
    ok = all(abs(v - t) <= 0.005 for v, t in zip(values, table))
    acceptance(1, title, "values", ok, " ".join(f"{v:.4f}" for v in values))
    acceptance(1, title, "runtime", dt < 1.0, f"{dt * 1e3:.1f} ms")
    assert ok and dt < 1.0


# 2 ---------------------------------------------------------------------------

@slow
def test_c2_monte_carlo_bell_violation(acceptance, qm_bell):
    title = "QM Monte Carlo CHSH within 3σ of the reference Bell table, cases 1-7 exceed 2 by ≥3σ"
    res = [bell_from_events(c, qm_bell["angles"], A, qm_bell["weights"]) for c in BELL_CASES]
    near = [abs(r.measured - c.qm_prediction) < 3 * r.sigma for r, c in zip(res, BELL_CASES)]
    above = [r.measured - 2.0 >= 3 * r.sigma for r in res[:7]]
    enough = qm_bell["n"] >= SELECTED_MIN_BELL
    acceptance(2, title, "selected pairs", enough, f"{qm_bell['n']}")
    acceptance(2, title, "within 3σ of table", all(near),
               " ".join(f"{r.case_id}:{fmt(r)}" for r in res))
    acceptance(2, title, "cases 1-7 above 2+3σ", all(above),
               " ".join(f"{r.case_id}:{(r.measured - 2) / r.sigma:.1f}σ" for r in res[:7]))
    acceptance(2, title, "runtime", qm_bell["seconds"] < 60.0, f"{qm_bell['seconds']:.1f} s for all cases")
    assert enough and all(near) and all(above)


# 3 ---------------------------------------------------------------------------

C3 = "LHV models: closed-form CHSH ≤ 2, Monte Carlo ≤ 2+3σ, deterministic saturates case 8"


def test_c3_lhv_closed_form_bound(acceptance):
    rng = np.random.default_rng(2010)
    worst = 0.0
    for a, b, ap, bp in rng.uniform(0, 360, (10_000, 4)):
        pairs = [(a, b), (a, bp), (ap, b), (ap, bp)]
        for fn in (lhv_deterministic_expectation, lhv_vector_expectation):
            worst = max(worst, chsh_sum(*(fn(separation_deg(x, y)) for x, y in pairs)))
    ok = worst <= 2.0 + 1e-12
    acceptance(3, C3, "closed form, 1e4 quadruples", ok, f"max CHSH {worst:.12f}")
    assert ok


@slow
def test_c3_vector_lhv_monte_carlo(acceptance, lhv_vector_bell):
    res = [bell_from_events(c, lhv_vector_bell["angles"], A, lhv_vector_bell["weights"]) for c in BELL_CASES]
    ok = all(r.measured <= 2.0 + 3 * r.sigma for r in res)
    acceptance(3, C3, "vector LHV Monte Carlo", ok, " ".join(f"{r.case_id}:{fmt(r)}" for r in res))
    assert ok


@slow
def test_c3_deterministic_lhv_monte_carlo(acceptance, lhv_det_bell):
    # The Sign-response model reaches ~2.26 through the 2/pi-calibrated estimator
    # at 45 degree spacing, so cases near 5 are expected to exceed 2 + 3 sigma.
    res = [bell_from_events(c, lhv_det_bell["angles"], A, lhv_det_bell["weights"]) for c in BELL_CASES]
    bad = [r for r in res if r.measured > 2.0 + 3 * r.sigma]
    acceptance(3, C3, "deterministic LHV Monte Carlo", not bad,
               " ".join(f"{r.case_id}:{fmt(r)}" for r in res)
               + (f"; over bound: {[r.case_id for r in bad]}" if bad else ""))
    assert not bad


@slow
def test_c3_deterministic_lhv_saturates_case8(acceptance, lhv_det_bell):
    r = bell_from_events(BELL_CASES[7], lhv_det_bell["angles"], A, lhv_det_bell["weights"])
    closed = bell_closed_form(BELL_CASES[7], lhv_deterministic_expectation)
    ok = abs(r.measured - 2.0) <= 3 * r.sigma and closed == pytest.approx(2.0, abs=1e-12)
    acceptance(3, C3, "case 8 saturation", ok, f"MC {fmt(r)}, closed form {closed:.12f}")
    assert ok


# 4 ---------------------------------------------------------------------------

C4 = "Wigner harness: QM closed form, QM Monte Carlo > 0 by 3σ (cases 2-5), deterministic LHV = 0 / ≤ 3σ"


def test_c4_wigner_closed_form(acceptance):
    quoted = {1: 0.0329, 3: 0.2071, 6: 0.0}
    vals = {c.id: wigner_qm_prediction(c) for c in WIGNER_CASES}
    formula = {c.id: np.sin(np.deg2rad(c.c) / 2) ** 2 - 2 * np.sin(np.deg2rad(c.c) / 4) ** 2 for c in WIGNER_CASES}
    ok = all(abs(vals[i] - formula[i]) <= 1e-6 for i in vals) and all(
        abs(vals[i] - q) <= 5e-5 for i, q in quoted.items())
    acceptance(4, C4, "QM closed form", ok, " ".join(f"{i}:{v:.6f}" for i, v in vals.items()))
    det = [wigner_closed_form(c, lhv_deterministic_expectation) for c in WIGNER_CASES]
    ok_det = all(d == pytest.approx(0.0, abs=1e-12) for d in det)
    acceptance(4, C4, "deterministic LHV closed form", ok_det, f"max |W| {max(map(abs, det)):.1e}")
    assert ok and ok_det


@slow
def test_c4_wigner_qm_monte_carlo(acceptance):
    s = run_sample("quantum_singlet", WIGNER_EVENTS, 2005)
    res = [wigner_from_events(c, s["angles"], A, s["weights"]) for c in WIGNER_CASES]
    ok = all(r.measured >= 3 * r.sigma for r in res[1:5]) and s["n"] >= SELECTED_MIN_WIGNER
    acceptance(4, C4, f"QM Monte Carlo ({s['n']} pairs)", ok,
               " ".join(f"{r.case_id}:{r.measured:+.3f}±{r.sigma:.3f}" for r in res))
    assert ok


@slow
def test_c4_wigner_deterministic_lhv_monte_carlo(acceptance):
    # Expected to exceed 0 + 3 sigma in cases 3-5 for the same estimator reason as criterion 3.
    s = run_sample("lhv_deterministic", WIGNER_EVENTS, 2006)
    res = [wigner_from_events(c, s["angles"], A, s["weights"]) for c in WIGNER_CASES]
    bad = [r.case_id for r in res if r.measured > 3 * r.sigma]
    acceptance(4, C4, f"deterministic LHV Monte Carlo ({s['n']} pairs)", not bad,
               " ".join(f"{r.case_id}:{r.measured:+.3f}±{r.sigma:.3f}" for r in res)
               + (f"; over bound: {bad}" if bad else ""))
    assert not bad


# 5 ---------------------------------------------------------------------------

@slow
@pytest.mark.parametrize("a_true, seed", [(0.20, 2004), (0.25, 2001)])
def test_c5_self_calibration_round_trip(acceptance, qm_bell, a_true, seed):
    s = qm_bell if seed == 2001 else run_sample("quantum_singlet", BELL_EVENTS, seed, analyzing_power=a_true)
    res = self_calibrate_analyzing_power(s["angles"], s["weights"])
    ok = res.ok and abs(res.a_est - a_true) < 3 * res.sigma and abs(res.a_est / a_true - 1) < 0.02
    acceptance(5, "self-calibrated A within 3σ and 2% relative at 1e6 pairs", f"A = {a_true}", ok,
               f"A_est {res.a_est:.5f}±{res.sigma:.5f} ({(res.a_est / a_true - 1) * 100:+.2f}%, "
               f"{(res.a_est - a_true) / res.sigma:+.2f}σ, {s['n']} pairs)")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_c6_calibration_factor_oracle(acceptance):
    rng = np.random.default_rng(2011)
    worst = 0.0
    for _ in range(50):
        a, b = rng.uniform(0, 360, 2)
        amp = rng.uniform(0.05, 1.0)
        expected = DILUTION**2 * amp**2 * -np.cos(np.deg2rad(a - b))
        worst = max(worst, abs(binary_moment_quadrature(a, b, amp) - expected))
    ok = worst <= 1e-6
    acceptance(6, "quadrature oracle for the (2/π)²A² dilution", "50 settings", ok, f"max deviation {worst:.1e}")
    assert ok


# 7 ---------------------------------------------------------------------------

C7 = "kinematics: energy-sum peaks, relative-KE cut efficiency, frame invariance"


@pytest.fixture(scope="module")
def default_events():
    events, _ = generate_range(RunConfig(seed=2007, n_events=400_000))
    return events


def test_c7_energy_sum_peaks(acceptance, default_events):
    win, rel = selection_mask(default_events.p1, default_events.p2)
    ok_all = True
    for ch, peak in ((Channel.HYDROGEN, 170.0), (Channel.CARBON, 158.0)):
        hist = energy_sum_spectrum(default_events.take(rel & (default_events.channel == ch)))
        lo, hi = hist.argmax_bin()
        ok = lo <= peak < hi
        ok_all &= ok
        acceptance(7, C7, f"{ch.name.lower()} argmax bin", ok, f"[{lo:g}, {hi:g}) MeV")
    assert ok_all


def test_c7_relative_ke_cut(acceptance, default_events):
    win, rel = selection_mask(default_events.p1, default_events.p2)
    signal = default_events.channel != Channel.BACKGROUND
    sig_pass = rel[signal].mean()
    bg_pass = rel[~signal].mean()
    ok = sig_pass == 1.0 and bg_pass < 0.10
    acceptance(7, C7, "cut efficiency", ok, f"signal {sig_pass:.4%}, background {bg_pass:.2%}")
    assert ok


def test_c7_relative_ke_frame_invariance(acceptance):
    rng = np.random.default_rng(2012)
    p1 = four_vector(PROTON_MASS_MEV, *rng.normal(0, 500, (3, 10_000)))
    p2 = four_vector(PROTON_MASS_MEV, *rng.normal(0, 500, (3, 10_000)))
    beta = rng.uniform(-0.55, 0.55, (10_000, 3))
    diff = np.abs(relative_kinetic_energy(boost(p1, beta), boost(p2, beta)) - relative_kinetic_energy(p1, p2))
    ok = diff.max() <= 1e-6
    acceptance(7, C7, "frame invariance", ok, f"max |Δ| {diff.max():.1e} MeV")
    assert ok


# 8 ---------------------------------------------------------------------------

C8 = "timing: Δt comb, exact classifier boundaries, randoms subtraction null and unbiasedness"


def test_c8_delta_t_comb(acceptance):
    cfg = RunConfig(seed=2013, n_events=300_000, timing=TimingConfig(random_pair_fraction=0.5))
    events, _ = generate_range(cfg)
    hist = delta_t_spectrum(events, cfg.timing)
    period = cfg.timing.bunch_period_ns
    offsets = []
    for k in range(-6, 7):
        near = np.abs(hist.centers - k * period) < period / 2
        offsets.append(hist.centers[near][np.argmax(hist.counts[near])] - k * period)
    ok = max(map(abs, offsets)) <= 2.0 and abs(period - 23.26) < 0.005
    acceptance(8, C8, "comb peaks at k·23.26 ns", ok, f"max peak offset {max(map(abs, offsets)):.2f} ns")
    assert ok


def test_c8_classifier_boundaries(acceptance):
    cfg = TimingConfig()
    cases = {20.0: Coincidence.TRUE, np.nextafter(20.0, 99): Coincidence.RANDOM,
             -20.0: Coincidence.TRUE, 150.0: Coincidence.RANDOM,
             np.nextafter(150.0, 999): Coincidence.OUTSIDE, 0.0: Coincidence.TRUE, 23.0: Coincidence.RANDOM}
    got = {dt: classify_coincidence(dt, cfg) for dt in cases}
    ok = all(got[dt] == c for dt, c in cases.items())
    acceptance(8, C8, "boundaries", ok, ", ".join(f"{float(dt)!r}->{Coincidence(v).name}" for dt, v in got.items()))
    assert ok


def _subtracted(seed, fraction, n_events, kind="quantum_singlet"):
    cfg = RunConfig(seed=seed, n_events=n_events, source=SourceModelSpec(kind),
                    timing=TimingConfig(random_pair_fraction=fraction),
                    analysis=AnalysisOptions(subtract_randoms=True))
    accepted, w = selected_sample(cfg)
    return (accepted.phi1, accepted.phi2), w


@slow
def test_c8_pure_randoms_null(acceptance):
    angles, w = _subtracted(2014, 1.0, 1_000_000)
    pairs = sorted({p for c in BELL_CASES for p in c.axis_pairs})
    zs = [(e.e_value / e.sigma) for e in (estimate_correlation(angles, a, b, A, w) for a, b in pairs)]
    ok = all(abs(v) < 3 for v in zs)
    acceptance(8, C8, "pure randoms null", ok, f"{len(pairs)} axis pairs, max |E/σ| {max(map(abs, zs)):.2f}")
    # Subtraction leaves a residual uncorrelated yield: the k = +/-1 accidental
    # peaks straddle the 20 ns boundary. Compare it with the analytic leak.
    p_true = random_true_window_fraction(TimingConfig().bunch_period_ns)
    expected = p_true - (1 - p_true) / 12
    n = len(w)
    net = w.sum() / n
    se = np.sqrt(np.sum(w**2) / n - net**2) / np.sqrt(n)
    ok_yield = abs(net - expected) < 3 * se
    acceptance(8, C8, "residual yield vs leak oracle", ok_yield,
               f"net {net:+.5f}±{se:.5f} per pair, oracle {expected:+.5f}")
    assert ok and ok_yield


@slow
def test_c8_subtraction_unbiased(acceptance):
    biases = {0.0: [], 90.0: []}
    for i in range(20):
        with_randoms = _subtracted(3000 + i, 0.2, 400_000)
        clean = _subtracted(3000 + i, 0.0, 400_000)
        for theta in biases:
            e1 = estimate_correlation(with_randoms[0], 0.0, theta, A, with_randoms[1]).e_value
            e0 = estimate_correlation(clean[0], 0.0, theta, A, clean[1]).e_value
            biases[theta].append(e1 - e0)
    detail, ok = [], True
    for theta, b in biases.items():
        b = np.asarray(b)
        se = b.std(ddof=1) / np.sqrt(len(b))
        passed = abs(b.mean()) < 2 * se
        # E(0,90) is the stated check; E(0,0) is where an unsubtracted accidental peak would show
        ok &= passed
        detail.append(f"E(0,{theta:g}) bias {b.mean():+.4f}±{se:.4f}")
    acceptance(8, C8, "subtraction unbiased over 20 runs", ok, "; ".join(detail))
    assert ok


# 9 ---------------------------------------------------------------------------

@slow
def test_c9_determinism_across_workers(acceptance, tmp_path):
    cfg = RunConfig(seed=2008, n_events=20_000)
    files, docs = [], []
    for workers in (1, 4, 8):
        path = tmp_path / f"events_{workers}.csv"
        doc, _ = run_pipeline(cfg, tmp_path / f"out_{workers}", events_path=path, workers=workers)
        files.append(path.read_bytes())
        docs.append((tmp_path / f"out_{workers}" / "results.json").read_bytes())
    ok = len(set(files)) == 1 and len(set(docs)) == 1 and dumps(doc).encode() == docs[0]
    acceptance(9, "byte-identical event files and results for 1, 4, 8 workers", "workers 1/4/8", ok,
               f"{len(files[0])} byte event file, {len(docs[0])} byte results document")
    assert ok
