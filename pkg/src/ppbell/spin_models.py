"""Closed-form spin correlations for the singlet source and the reference
local-hidden-variable (LHV) models.

Angles are in degrees throughout the public API. Correlations follow the
convention E(a, b) = <s1 s2> with s = +/-1 outcomes along axes a and b.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


def normalize_deg(angle):
    """Map an angle (scalar or array) into [0, 360)."""
    out = np.mod(angle, 360.0)
    # np.mod can round tiny negatives up to exactly 360
    out = np.where(out >= 360.0, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def separation_deg(a, b):
    """Unsigned angle between two transverse directions, in [0, 180]."""
    d = np.abs(np.mod(np.asarray(a, dtype=float) - b, 360.0))
    d = np.where(d > 180.0, 360.0 - d, d)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class MeasurementAxis:
    """Analysis direction in the analyzer (transverse) plane."""

    angle_deg: float

    def __post_init__(self):
        if not np.isfinite(self.angle_deg):
            raise ValueError(f"axis angle must be finite, got {self.angle_deg}")
        object.__setattr__(self, "angle_deg", normalize_deg(float(self.angle_deg)))

    def separation(self, other: "MeasurementAxis") -> float:
        return separation_deg(self.angle_deg, other.angle_deg)


class SourceKind(str, enum.Enum):
    QUANTUM_SINGLET = "quantum_singlet"
    LHV_VECTOR = "lhv_vector"
    LHV_DETERMINISTIC = "lhv_deterministic"
    UNPOLARIZED = "unpolarized"


class Response(str, enum.Enum):
    """Azimuthal response of the deterministic LHV model in the analyzer."""

    SIGN = "sign"
    COSINE = "cosine"


# integer codes used in event arrays and files
SOURCE_CODES = {
    SourceKind.QUANTUM_SINGLET: 0,
    SourceKind.LHV_VECTOR: 1,
    SourceKind.LHV_DETERMINISTIC: 2,
    SourceKind.UNPOLARIZED: 3,
}
SOURCE_FROM_CODE = {v: k for k, v in SOURCE_CODES.items()}


@dataclass(frozen=True)
class SourceModelSpec:
    kind: SourceKind = SourceKind.QUANTUM_SINGLET
    response: Response = Response.SIGN

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        object.__setattr__(self, "response", Response(self.response))

    @property
    def code(self) -> int:
        return SOURCE_CODES[self.kind]

    @property
    def has_hidden_azimuth(self) -> bool:
        return self.kind in (SourceKind.LHV_VECTOR, SourceKind.LHV_DETERMINISTIC)


class HiddenMarker(str, enum.Enum):
    ENTANGLED = "entangled"
    UNPOLARIZED = "unpolarized"


def qm_expectation(theta_deg):
    """Singlet correlation -cos(theta)."""
    return -np.cos(np.deg2rad(theta_deg))


def qm_joint_probability(theta_deg, outcome1, outcome2):
    """Probability of the outcome pair (s1, s2) for the singlet at separation theta."""
    for s in (outcome1, outcome2):
        if not np.all(np.isin(s, (-1, 1))):
            raise ValueError("outcomes must be +1 or -1")
    return 0.25 * (1.0 - np.asarray(outcome1) * np.asarray(outcome2) * np.cos(np.deg2rad(theta_deg)))


def qm_wigner_probability(theta_deg):
    """Probability that both projections point the same way: sin^2(theta/2)."""
    return np.sin(np.deg2rad(theta_deg) / 2.0) ** 2


def lhv_deterministic_expectation(theta_deg):
    """Sign model with outcomes sgn cos(lambda - a), -sgn cos(lambda - b): -1 + theta/90."""
    return -1.0 + separation_deg(theta_deg, 0.0) / 90.0


def lhv_vector_expectation(theta_deg):
    """Anti-parallel polarization vectors at uniform azimuth, read by a calibrated polarimeter."""
    return -0.5 * np.cos(np.deg2rad(theta_deg))


def lhv_sign_polarimeter_expectation(theta_deg):
    """Calibrated binary-estimator expectation for the deterministic LHV with Sign response.

    The Sign response puts odd harmonics beyond the first into the azimuthal
    density, which the 2/pi dilution correction does not account for. The
    estimator therefore converges to

        -pi^2/12 + t^2/2 - t^3/(3 pi),   t = separation in radians,

    not to lhv_deterministic_expectation. It is -0.822 at t = 0 and its CHSH
    sum peaks at about 2.26 at 45 degree spacing.
    """
    t = np.deg2rad(separation_deg(theta_deg, 0.0))
    return -np.pi**2 / 12.0 + t**2 / 2.0 - t**3 / (3.0 * np.pi)


def estimator_expectation(model: SourceModelSpec, theta_deg):
    """Value the calibrated binary estimator converges to for ``model``."""
    kind = model.kind
    if kind is SourceKind.QUANTUM_SINGLET:
        return qm_expectation(theta_deg)
    if kind is SourceKind.LHV_VECTOR:
        return lhv_vector_expectation(theta_deg)
    if kind is SourceKind.LHV_DETERMINISTIC:
        if model.response is Response.COSINE:
            return lhv_vector_expectation(theta_deg)
        return lhv_sign_polarimeter_expectation(theta_deg)
    return np.zeros_like(np.asarray(theta_deg, dtype=float)) + 0.0


def closed_form_expectation(model: SourceModelSpec, theta_deg):
    """Outcome-level correlation of each model (what the inequalities are about)."""
    kind = model.kind
    if kind is SourceKind.QUANTUM_SINGLET:
        return qm_expectation(theta_deg)
    if kind is SourceKind.LHV_VECTOR:
        return lhv_vector_expectation(theta_deg)
    if kind is SourceKind.LHV_DETERMINISTIC:
        return lhv_deterministic_expectation(theta_deg)
    return np.zeros_like(np.asarray(theta_deg, dtype=float)) + 0.0


def sample_hidden_state(model: SourceModelSpec, rng: np.random.Generator, size=None):
    """Draw the per-pair hidden azimuth in degrees.

    Models without a hidden value return a marker and consume no randomness.
    """
    if model.kind is SourceKind.QUANTUM_SINGLET:
        return HiddenMarker.ENTANGLED
    if model.kind is SourceKind.UNPOLARIZED:
        return HiddenMarker.UNPOLARIZED
    return normalize_deg(rng.uniform(0.0, 360.0, size=size))
