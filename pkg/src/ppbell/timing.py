"""Cyclotron bunch structure, hit-time stamping and true/random coincidence
classification with sideband subtraction."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .events import EventBatch
from .kinematics import Histogram, centered_histogram


class DegenerateSideband(ValueError):
    pass


@dataclass(frozen=True)
class TimingConfig:
    rf_frequency_mhz: float = 43.0
    hardware_window_ns: float = 150.0
    true_window_ns: float = 20.0
    tdc_bin_ns: float = 1.0
    tdc_range_ns: float = 350.0
    time_resolution_sigma_ns: float = 0.5
    flight_spread_ns: float = 5.0
    # hit time of track 1 for a pair from the reference bunch
    reference_time_ns: float = 175.0
    random_pair_fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.true_window_ns < self.hardware_window_ns <= self.tdc_range_ns:
            raise ValueError("need 0 < true_window < hardware_window <= tdc_range")
        if self.time_resolution_sigma_ns <= 0.0:
            raise ValueError("time resolution must be positive")
        if self.rf_frequency_mhz <= 0.0 or self.tdc_bin_ns < 0.0 or self.flight_spread_ns < 0.0:
            raise ValueError("rf frequency must be positive, tdc bin and flight spread non-negative")
        if not 0.0 <= self.random_pair_fraction <= 1.0:
            raise ValueError("random_pair_fraction must lie in [0, 1]")

    @property
    def bunch_period_ns(self) -> float:
        return 1000.0 / self.rf_frequency_mhz

    @property
    def max_bunch_offset(self) -> int:
        """Largest |k| with k bunch periods inside the hardware window."""
        return int(math.floor(self.hardware_window_ns / self.bunch_period_ns))

    @property
    def true_bunches(self) -> int:
        return 2 * int(math.floor(self.true_window_ns / self.bunch_period_ns)) + 1

    @property
    def sideband_bunches(self) -> int:
        return 2 * self.max_bunch_offset + 1 - self.true_bunches


class Coincidence(enum.IntEnum):
    TRUE = 0
    RANDOM = 1
    OUTSIDE = 2


def draw_bunch_offsets(rng, n, cfg: TimingConfig, include_zero=False):
    """Uniform integer bunch offsets with |k| T inside the hardware window."""
    kmax = cfg.max_bunch_offset
    if include_zero:
        return rng.integers(-kmax, kmax + 1, n)
    if kmax == 0:
        raise ValueError("no non-zero bunch offset fits in the hardware window")
    k = rng.integers(1, kmax + 1, n)
    return np.where(rng.random(n) < 0.5, -k, k)


def _quantize(t, cfg):
    if cfg.tdc_bin_ns > 0:
        t = np.floor(t / cfg.tdc_bin_ns) * cfg.tdc_bin_ns
    return np.clip(t, 0.0, cfg.tdc_range_ns)


def stamp_times(events: EventBatch, is_random_pair, cfg: TimingConfig, rng: np.random.Generator,
                bunch_offset=None) -> EventBatch:
    """Set t1, t2 (ns, TDC-quantized) in place.

    True pairs share the reference bunch. Random pairs put track 2 in bunch k;
    without explicit offsets k is drawn uniformly over the non-zero offsets
    that fit in the hardware window.
    """
    n = len(events)
    is_random = np.broadcast_to(np.asarray(is_random_pair, dtype=bool), (n,))
    k = np.zeros(n, np.int64)
    if bunch_offset is None:
        nr = int(is_random.sum())
        if nr:
            k[is_random] = draw_bunch_offsets(rng, nr, cfg)
    else:
        k = np.where(is_random, np.broadcast_to(np.asarray(bunch_offset, dtype=np.int64), (n,)), 0)
    flight = rng.uniform(0.0, cfg.flight_spread_ns, (2, n))
    noise = rng.normal(0.0, cfg.time_resolution_sigma_ns, (2, n))
    t1 = cfg.reference_time_ns + flight[0] + noise[0]
    t2 = cfg.reference_time_ns + k * cfg.bunch_period_ns + flight[1] + noise[1]
    events.t1 = _quantize(t1, cfg)
    events.t2 = _quantize(t2, cfg)
    events.bunch_offset = k
    return events


def classify_coincidence(dt_ns, cfg: TimingConfig):
    """Coincidence class from the hit-time difference; ties go to the tighter class."""
    if isinstance(dt_ns, EventBatch):
        dt_ns = dt_ns.delta_t
    adt = np.abs(np.asarray(dt_ns, dtype=float))
    out = np.where(
        adt <= cfg.true_window_ns,
        Coincidence.TRUE,
        np.where(adt <= cfg.hardware_window_ns, Coincidence.RANDOM, Coincidence.OUTSIDE),
    ).astype(np.int8)
    return int(out) if out.ndim == 0 else out


@dataclass
class SubtractionWeights:
    w: float
    n_true: int
    n_random: int
    n_outside: int
    weights: np.ndarray

    def as_dict(self):
        return {"w": self.w, "n_true": self.n_true, "n_random": self.n_random, "n_outside": self.n_outside}


def random_subtraction_weights(classes, cfg: TimingConfig) -> SubtractionWeights:
    """Signed per-event weights: +1 in the true window, -w in the sideband.

    w is the ratio of bunches inside the true window to bunches in the
    sideband, so the sideband estimates the accidentals hiding under the
    true peak.
    """
    classes = np.asarray(classes)
    n_true = int(np.sum(classes == Coincidence.TRUE))
    n_random = int(np.sum(classes == Coincidence.RANDOM))
    n_out = int(np.sum(classes == Coincidence.OUTSIDE))
    if n_random and cfg.sideband_bunches <= 0:
        raise DegenerateSideband("random-class events present but the sideband holds no whole bunch")
    w = cfg.true_bunches / cfg.sideband_bunches if cfg.sideband_bunches > 0 else 0.0
    weights = np.zeros(classes.shape)
    weights[classes == Coincidence.TRUE] = 1.0
    if n_random:
        weights[classes == Coincidence.RANDOM] = -w
    return SubtractionWeights(w, n_true, n_random, n_out, weights)


def delta_t_spectrum(events: EventBatch, cfg: TimingConfig, bin_width_ns=None) -> Histogram:
    width = bin_width_ns or cfg.tdc_bin_ns or 1.0
    dt = events.delta_t if len(events) else np.zeros(0)
    return centered_histogram(dt, width, -cfg.hardware_window_ns, cfg.hardware_window_ns)
