"""Offline estimators and the Bell/Wigner inequality harness.

Each scatter is classified left/right (+1/-1) relative to an analysis axis.
For a density whose spin dependence is a first azimuthal harmonic, the
binary product moment is diluted by (2/pi)^2 A^2 relative to the spin
correlation, and the estimators undo that factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .cases import BellCase, WignerCase
from .events import EventBatch
from .spin_models import MeasurementAxis, qm_expectation, separation_deg

DILUTION = 2.0 / np.pi


class CalibrationError(ValueError):
    pass


class EmptySample(ValueError):
    pass


def classify(phi_deg, axis):
    """sgn cos(phi - axis) as int8, with phi - axis = +/-90 deg counted as +1."""
    axis_deg = axis.angle_deg if isinstance(axis, MeasurementAxis) else axis
    d = np.mod(np.asarray(phi_deg, dtype=float) - axis_deg, 360.0)
    out = np.where((d <= 90.0) | (d >= 270.0), 1, -1).astype(np.int8)
    return int(out) if out.ndim == 0 else out


@dataclass
class CorrelationEstimate:
    axis_a: MeasurementAxis
    axis_b: MeasurementAxis
    e_value: float
    sigma: float
    counts: dict
    n_events: int
    raw_moment: float
    n_eff: float

    def as_dict(self):
        return {
            "axis_a_deg": self.axis_a.angle_deg,
            "axis_b_deg": self.axis_b.angle_deg,
            "e_value": self.e_value,
            "sigma": self.sigma,
            "counts": dict(self.counts),
            "n_events": self.n_events,
            "raw_moment": self.raw_moment,
            "n_eff": self.n_eff,
        }


def weighted_mean(x, weights=None):
    """Ratio estimate sum(w x) / sum(w) and its delta-method standard error.

    With unit weights the error reduces to sqrt(var/N) for +/-1 data,
    i.e. sqrt((1 - m^2) / N).
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptySample("no events to average")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    wsum = w.sum()
    if wsum == 0.0:
        return np.nan, np.inf
    m = float(np.dot(w, x) / wsum)
    err = float(np.sqrt(np.dot(w**2, (x - m) ** 2)) / abs(wsum))
    return m, err


def _angles(events):
    if isinstance(events, EventBatch):
        return events.phi1, events.phi2
    return events


def estimate_correlation(events, axis_a, axis_b, analyzing_power, weights=None) -> CorrelationEstimate:
    """Calibrated correlation E(a, b) from scatter azimuths.

    ``events`` is an EventBatch of accepted pairs or a (phi1, phi2) tuple.
    """
    if not analyzing_power > 0.0:
        raise CalibrationError(f"analyzing power must be positive, got {analyzing_power}")
    axis_a = axis_a if isinstance(axis_a, MeasurementAxis) else MeasurementAxis(axis_a)
    axis_b = axis_b if isinstance(axis_b, MeasurementAxis) else MeasurementAxis(axis_b)
    phi1, phi2 = _angles(events)
    if len(phi1) == 0:
        raise EmptySample("no accepted events for the correlation estimate")
    s1 = classify(phi1, axis_a)
    s2 = classify(phi2, axis_b)
    w = np.ones(len(phi1)) if weights is None else np.asarray(weights, dtype=float)
    counts = {
        "n_pp": float(w[(s1 > 0) & (s2 > 0)].sum()),
        "n_pm": float(w[(s1 > 0) & (s2 < 0)].sum()),
        "n_mp": float(w[(s1 < 0) & (s2 > 0)].sum()),
        "n_mm": float(w[(s1 < 0) & (s2 < 0)].sum()),
    }
    m, err = weighted_mean(s1 * s2, w)
    scale = DILUTION**2 * analyzing_power**2
    wsum = w.sum()
    n_eff = float(wsum**2 / np.dot(w, w)) if np.dot(w, w) > 0 else 0.0
    return CorrelationEstimate(axis_a, axis_b, m / scale, err / scale, counts, len(phi1), m, n_eff)


@dataclass
class CalibrationResult:
    a_est: float
    sigma: float
    moment: float
    moment_sigma: float
    ok: bool
    n_events: int

    def as_dict(self):
        return {
            "a_est": None if not self.ok else self.a_est,
            "sigma": None if not self.ok else self.sigma,
            "moment": self.moment,
            "moment_sigma": self.moment_sigma,
            "ok": self.ok,
            "n_events": self.n_events,
        }


def self_calibrate_analyzing_power(events, weights=None) -> CalibrationResult:
    """A from the singlet moment <cos(phi1 - phi2)> = -A^2 / 2.

    Only meaningful if the pairs are singlets; a positive moment is reported
    as a failed calibration.
    """
    phi1, phi2 = _angles(events)
    if len(phi1) == 0:
        raise EmptySample("no events to calibrate on")
    x = np.cos(np.deg2rad(np.asarray(phi1) - np.asarray(phi2)))
    m, err = weighted_mean(x, weights)
    if not m < 0.0:
        return CalibrationResult(np.nan, np.nan, m, err, False, len(phi1))
    a = float(np.sqrt(-2.0 * m))
    return CalibrationResult(a, err / a, m, err, True, len(phi1))


def wigner_probability(estimate: CorrelationEstimate):
    """Probability of same-sign outcomes and its error: (1 + E) / 2."""
    return 0.5 * (1.0 + estimate.e_value), 0.5 * estimate.sigma


class Verdict(str, enum.Enum):
    VIOLATES_CLASSICAL = "violates_classical"
    CONSISTENT = "consistent"
    INCONCLUSIVE = "inconclusive"


INCONCLUSIVE_SIGMAS = 2.0


def verdict(measured, sigma, limit) -> Verdict:
    if abs(measured - limit) < INCONCLUSIVE_SIGMAS * sigma:
        return Verdict.INCONCLUSIVE
    return Verdict.VIOLATES_CLASSICAL if measured > limit else Verdict.CONSISTENT


@dataclass
class InequalityResult:
    kind: str
    case_id: int
    measured: float
    sigma: float
    prediction_qm: float
    classical_limit: float
    verdict: Verdict
    terms: list = field(default_factory=list)

    def as_dict(self):
        return {
            "kind": self.kind,
            "case_id": self.case_id,
            "measured": self.measured,
            "sigma": self.sigma,
            "prediction_qm": self.prediction_qm,
            "classical_limit": self.classical_limit,
            "verdict": self.verdict.value,
            "terms": self.terms,
        }


def chsh_sum(e_ab, e_abp, e_apb, e_apbp):
    return abs(e_ab - e_abp + e_apb + e_apbp)


def bell_qm_prediction(case: BellCase) -> float:
    return float(chsh_sum(*(qm_expectation(separation_deg(x, y)) for x, y in case.axis_pairs)))


def bell_closed_form(case: BellCase, expectation) -> float:
    """CHSH sum for a closed-form correlation function of the separation."""
    return float(chsh_sum(*(expectation(separation_deg(x, y)) for x, y in case.axis_pairs)))


def _check_axes(expected, estimates):
    for (x, y), est in zip(expected, estimates):
        if not (np.isclose(est.axis_a.angle_deg, MeasurementAxis(x).angle_deg)
                and np.isclose(est.axis_b.angle_deg, MeasurementAxis(y).angle_deg)):
            raise ValueError(
                f"estimate axes ({est.axis_a.angle_deg}, {est.axis_b.angle_deg}) do not match case ({x}, {y})"
            )


def evaluate_bell(case: BellCase, estimates) -> InequalityResult:
    """Estimates in case order: E(a,b), E(a,b'), E(a',b), E(a',b')."""
    estimates = list(estimates)
    if len(estimates) != 4:
        raise ValueError("a Bell case needs four correlation estimates")
    _check_axes(case.axis_pairs, estimates)
    vals = [e.e_value for e in estimates]
    measured = float(chsh_sum(*vals))
    sigma = float(np.sqrt(sum(e.sigma**2 for e in estimates)))
    return InequalityResult("bell", case.id, measured, sigma, bell_qm_prediction(case), case.limit,
                            verdict(measured, sigma, case.limit), vals)


def wigner_qm_prediction(case: WignerCase) -> float:
    t = np.deg2rad(separation_deg(case.a, case.c))
    return float(np.sin(t / 2.0) ** 2 - 2.0 * np.sin(t / 4.0) ** 2)


def wigner_combination(p_ac, p_ab, p_bc):
    return p_ac - p_ab - p_bc


def wigner_closed_form(case: WignerCase, expectation) -> float:
    """Wigner combination for a closed-form correlation function, via P = (1 + E) / 2."""
    p = [0.5 * (1.0 + expectation(separation_deg(x, y))) for x, y in case.axis_pairs]
    return float(wigner_combination(*p))


def evaluate_wigner(case: WignerCase, probabilities) -> InequalityResult:
    """``probabilities``: (value, sigma) for P(a,c), P(a,b), P(b,c)."""
    probabilities = list(probabilities)
    if len(probabilities) != 3:
        raise ValueError("a Wigner case needs three same-sign probabilities")
    vals = [float(p[0]) for p in probabilities]
    measured = float(wigner_combination(*vals))
    sigma = float(np.sqrt(sum(float(p[1]) ** 2 for p in probabilities)))
    return InequalityResult("wigner", case.id, measured, sigma, wigner_qm_prediction(case), case.limit,
                            verdict(measured, sigma, case.limit), vals)


def bell_from_events(case: BellCase, events, analyzing_power, weights=None) -> InequalityResult:
    ests = [estimate_correlation(events, x, y, analyzing_power, weights) for x, y in case.axis_pairs]
    return evaluate_bell(case, ests)


def wigner_from_events(case: WignerCase, events, analyzing_power, weights=None) -> InequalityResult:
    probs = [wigner_probability(estimate_correlation(events, x, y, analyzing_power, weights))
             for x, y in case.axis_pairs]
    return evaluate_wigner(case, probs)


def bootstrap_errors(events, estimator, n_resamples, rng: np.random.Generator) -> float:
    """Standard deviation of ``estimator`` over event-level resamples with replacement.

    ``estimator`` takes an EventBatch (or a tuple of equal-length arrays) and
    returns a float.
    """
    if n_resamples < 50:
        raise ValueError("bootstrap needs at least 50 resamples")
    n = len(events) if isinstance(events, EventBatch) else len(events[0])
    if n == 0:
        raise EmptySample("nothing to resample")
    vals = np.empty(n_resamples)
    for i in range(n_resamples):
        idx = rng.integers(0, n, n)
        sample = events.take(idx) if isinstance(events, EventBatch) else tuple(np.asarray(a)[idx] for a in events)
        vals[i] = estimator(sample)
    return float(vals.std(ddof=1))
