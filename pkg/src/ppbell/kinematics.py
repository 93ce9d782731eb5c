"""Four-vector algebra, (d,2He) pair generation and kinematic selection.

Four-vectors are arrays whose last axis is (E, px, py, pz).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .events import Channel, EventBatch

PROTON_MASS_MEV = 938.272


class InvalidKinematics(ValueError):
    pass


class GenerationExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    beam_energy_mev: float = 170.0
    peak_sum_h_mev: float = 170.0
    peak_sum_c_mev: float = 158.0
    peak_sigma_mev: float = 1.0
    relative_ke_max_gen_mev: float = 0.8
    background_fraction: float = 0.1
    carbon_to_hydrogen_ratio: float = 1.0
    # centred on the momentum of a proton carrying half of the 170 MeV sum;
    # the nominal 600 +/- 50 MeV/c spectrometer setting is NOMINAL_WINDOW_MEVC
    momentum_window_mevc: tuple = (358.0, 458.0)
    # pair direction of (d,2He) signal
    cone_half_angle_deg: float = 10.0
    # uncorrelated background tracks; a narrow cone lets ~1/3 of random pairs
    # through the 1 MeV relative-KE cut
    background_cone_half_angle_deg: float = 45.0
    max_regeneration_rounds: int = 200

    def __post_init__(self):
        object.__setattr__(self, "momentum_window_mevc", tuple(float(x) for x in self.momentum_window_mevc))
        self.validate()

    def validate(self):
        lo, hi = self.momentum_window_mevc
        if not 0.0 <= lo < hi:
            raise ValueError(f"momentum window must be non-empty, got {self.momentum_window_mevc}")
        if not 0.0 <= self.background_fraction <= 1.0:
            raise ValueError("background_fraction must lie in [0, 1]")
        if self.carbon_to_hydrogen_ratio < 0.0:
            raise ValueError("carbon_to_hydrogen_ratio must be >= 0")
        if self.peak_sigma_mev < 0.0 or self.relative_ke_max_gen_mev < 0.0:
            raise ValueError("peak_sigma and relative_ke_max_gen must be >= 0")
        for cone in (self.cone_half_angle_deg, self.background_cone_half_angle_deg):
            if not 0.0 < cone <= 180.0:
                raise ValueError("cone half-angles must lie in (0, 180]")

    def peak_sum(self, channel: Channel) -> float:
        return self.peak_sum_h_mev if Channel(channel) is Channel.HYDROGEN else self.peak_sum_c_mev


NOMINAL_WINDOW_MEVC = (550.0, 650.0)


def four_vector(mass, px, py, pz):
    px, py, pz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (px, py, pz)))
    e = np.sqrt(mass**2 + px**2 + py**2 + pz**2)
    return np.stack([e, px, py, pz], axis=-1)


def momentum(p):
    return np.linalg.norm(p[..., 1:], axis=-1)


def invariant_mass_sq(p):
    return p[..., 0] ** 2 - np.sum(p[..., 1:] ** 2, axis=-1)


def invariant_mass(p):
    return np.sqrt(invariant_mass_sq(p))


def kinetic_energy(p, mass=PROTON_MASS_MEV):
    return p[..., 0] - mass


def boost(p, beta):
    """Components of ``p`` in a frame moving with velocity ``beta`` (units of c)."""
    p = np.asarray(p, dtype=float)
    beta = np.asarray(beta, dtype=float)
    b2 = np.sum(beta**2, axis=-1)
    if np.any(b2 >= 1.0):
        raise InvalidKinematics("boost velocity must be below c")
    gamma = 1.0 / np.sqrt(1.0 - b2)
    bp = np.sum(beta * p[..., 1:], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        g2 = np.where(b2 > 0, (gamma - 1.0) / b2, 0.0)
    e = gamma * (p[..., 0] - bp)
    vec = p[..., 1:] + ((g2 * bp - gamma * p[..., 0])[..., None]) * beta
    return np.concatenate([e[..., None], vec], axis=-1)


def pair_velocity(p1, p2):
    total = np.asarray(p1, dtype=float) + p2
    m2 = invariant_mass_sq(total)
    if np.any(~(m2 > 0.0)) or np.any(total[..., 0] <= 0.0):
        raise InvalidKinematics("total four-momentum of the pair is not timelike")
    return total[..., 1:] / total[..., 0:1]


def boost_to_pair_cm(p1, p2):
    """Both tracks expressed in the rest frame of the pair."""
    beta = pair_velocity(p1, p2)
    return boost(p1, beta), boost(p2, beta)


def relative_kinetic_energy(p1, p2, mass=PROTON_MASS_MEV):
    """sqrt(s) - 2 m of the pair; zero for two protons at relative rest."""
    pair_velocity(p1, p2)  # validates timelike
    return invariant_mass(np.asarray(p1, dtype=float) + p2) - 2.0 * mass


def _cone_directions(rng, n, half_angle_deg):
    cos_min = np.cos(np.deg2rad(half_angle_deg))
    cos_t = rng.uniform(cos_min, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1)


def _isotropic(rng, n):
    return _cone_directions(rng, n, 180.0)


def _in_window(p, window):
    q = momentum(p)
    return (q >= window[0]) & (q <= window[1])


@dataclass
class PairKinematics:
    p1: np.ndarray
    p2: np.ndarray
    relative_ke_true: np.ndarray
    regenerated: int = 0


def _draw_signal(cfg, channel, rng, n):
    m = PROTON_MASS_MEV
    t_sum = rng.normal(cfg.peak_sum(channel), cfg.peak_sigma_mev, n)
    eps = rng.uniform(0.0, cfg.relative_ke_max_gen_mev, n)
    # a negative energy sum is unphysical; such draws are pushed to threshold
    t_sum = np.maximum(t_sum, eps)
    mass = 2.0 * m + eps
    e_tot = 2.0 * m + t_sum
    p_tot = np.sqrt(np.clip(e_tot**2 - mass**2, 0.0, None))
    beta = (p_tot / e_tot)[:, None] * _cone_directions(rng, n, cfg.cone_half_angle_deg)
    p_star = np.sqrt(np.clip((mass / 2.0) ** 2 - m**2, 0.0, None))
    u = _isotropic(rng, n) * p_star[:, None]
    e_star = (mass / 2.0)[:, None]
    p1 = boost(np.concatenate([e_star, u], axis=-1), -beta)
    p2 = boost(np.concatenate([e_star, -u], axis=-1), -beta)
    return p1, p2, eps


def generate_signal_event(cfg: GeneratorConfig, channel: Channel, rng: np.random.Generator, size: int = 1):
    """(d,2He) singlet pairs for one target channel.

    Energy sum is Gaussian at the channel peak, relative kinetic energy uniform
    on [0, relative_ke_max_gen], decay isotropic in the pair rest frame and the
    pair direction uniform within the forward cone. Pairs with a track outside
    the momentum window are redrawn.
    """
    p1, p2, eps = _draw_signal(cfg, channel, rng, size)
    bad = ~(_in_window(p1, cfg.momentum_window_mevc) & _in_window(p2, cfg.momentum_window_mevc))
    regenerated = 0
    rounds = 0
    while bad.any():
        if rounds >= cfg.max_regeneration_rounds:
            raise GenerationExhausted(
                f"{int(bad.sum())} pairs still outside momentum window "
                f"{cfg.momentum_window_mevc} after {rounds} regeneration rounds"
            )
        idx = np.flatnonzero(bad)
        regenerated += idx.size
        q1, q2, e = _draw_signal(cfg, channel, rng, idx.size)
        p1[idx], p2[idx], eps[idx] = q1, q2, e
        ok = _in_window(q1, cfg.momentum_window_mevc) & _in_window(q2, cfg.momentum_window_mevc)
        bad[idx] = ~ok
        rounds += 1
    return PairKinematics(p1, p2, eps, regenerated)


def generate_background_event(cfg: GeneratorConfig, rng: np.random.Generator, size: int = 1):
    """Two uncorrelated protons, momenta uniform in the window, directions in the cone."""
    lo, hi = cfg.momentum_window_mevc
    tracks = []
    for _ in range(2):
        q = rng.uniform(lo, hi, size)
        d = _cone_directions(rng, size, cfg.background_cone_half_angle_deg) * q[:, None]
        tracks.append(four_vector(PROTON_MASS_MEV, d[:, 0], d[:, 1], d[:, 2]))
    return PairKinematics(tracks[0], tracks[1], np.full(size, np.nan), 0)


@dataclass
class SelectionReport:
    n_input: int = 0
    # (cut name, passed, failed) in application order
    cuts: list = field(default_factory=list)

    @property
    def n_selected(self) -> int:
        return self.cuts[-1][1] if self.cuts else self.n_input

    def as_dict(self):
        return {
            "n_input": self.n_input,
            "cuts": [{"cut": c, "passed": int(p), "failed": int(f)} for c, p, f in self.cuts],
        }


def selection_mask(p1, p2, cut_mev=1.0, window=GeneratorConfig().momentum_window_mevc):
    """Boolean masks after each cut: (momentum window, relative KE)."""
    win = _in_window(p1, window) & _in_window(p2, window)
    rel = np.zeros(len(win), bool)
    if win.any():
        rel[win] = relative_kinetic_energy(p1[win], p2[win]) < cut_mev
    return win, rel


def select_pairs(events: EventBatch, cut_mev=1.0, window=None):
    window = GeneratorConfig().momentum_window_mevc if window is None else tuple(window)
    report = SelectionReport(n_input=len(events))
    if len(events) == 0:
        report.cuts = [("momentum_window", 0, 0), ("relative_ke", 0, 0)]
        return events, report
    win, keep = selection_mask(events.p1, events.p2, cut_mev, window)
    n_win = int(win.sum())
    n_keep = int(keep.sum())
    report.cuts = [
        ("momentum_window", n_win, len(events) - n_win),
        ("relative_ke", n_keep, n_win - n_keep),
    ]
    return events.take(keep), report


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def argmax_bin(self):
        i = int(np.argmax(self.counts))
        return self.edges[i], self.edges[i + 1]


def centered_histogram(values, bin_width, lo, hi, weights=None):
    """Histogram with bins centred on integer multiples of ``bin_width``.

    The range [lo, hi] is widened to cover all values, so every entry is counted.
    """
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    values = np.asarray(values, dtype=float)
    if values.size:
        lo, hi = min(lo, values.min()), max(hi, values.max())
    k_lo = int(np.floor(lo / bin_width + 0.5))
    k_hi = int(np.floor(hi / bin_width + 0.5))
    edges = (np.arange(k_lo, k_hi + 2) - 0.5) * bin_width
    counts, _ = np.histogram(values, bins=edges, weights=weights)
    return Histogram(edges, counts)


def energy_sum_spectrum(events, bin_width_mev=1.0, lo=100.0, hi=250.0):
    """Histogram of T1 + T2 for an EventBatch (or any object with p1, p2)."""
    t_sum = kinetic_energy(events.p1) + kinetic_energy(events.p2) if len(events.p1) else np.zeros(0)
    return centered_histogram(t_sum, bin_width_mev, lo, hi)
