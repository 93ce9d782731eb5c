"""Full event simulation: channel mix, kinematics, hidden state, polarimetry
and timing, generated block by block from counter-based streams."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as streams
from .config import RunConfig
from .events import Channel, EventBatch
from .kinematics import generate_background_event, generate_signal_event
from .polarimeter import sample_scatter
from .spin_models import SOURCE_CODES, SourceKind, sample_hidden_state
from .timing import draw_bunch_offsets, stamp_times


@dataclass
class GenerationReport:
    seed: int
    n_events: int = 0
    channel_counts: dict = field(default_factory=lambda: {"H": 0, "C": 0, "BG": 0})
    n_accidental: int = 0
    regenerated: int = 0

    def merge(self, other: "GenerationReport"):
        self.n_events += other.n_events
        for k, v in other.channel_counts.items():
            self.channel_counts[k] += v
        self.n_accidental += other.n_accidental
        self.regenerated += other.regenerated

    def as_dict(self):
        return {
            "seed": self.seed,
            "n_events": self.n_events,
            "channel_counts": dict(self.channel_counts),
            "n_accidental": self.n_accidental,
            "regenerated": self.regenerated,
        }


def generate_block(cfg: RunConfig, block: int, block_size: int = streams.BLOCK_SIZE):
    """Events with ids in [block * block_size, (block + 1) * block_size) clipped to n_events.

    The whole block is always simulated, so an event does not depend on n_events.
    """
    start = block * block_size
    keep = min(start + block_size, cfg.n_events) - start
    if keep <= 0:
        return EventBatch(), GenerationReport(cfg.seed)
    n = block_size
    ev = EventBatch.allocate(n)
    ev.event_id = np.arange(start, start + n, dtype=np.int64)
    report = GenerationReport(cfg.seed, n)
    gen = cfg.generator

    r = streams.stream(cfg.seed, block, streams.STAGE_CHANNEL)
    u_bg, u_c, u_acc = r.random(n), r.random(n), r.random(n)
    k_acc = draw_bunch_offsets(r, n, cfg.timing, include_zero=True)
    ratio = gen.carbon_to_hydrogen_ratio
    channel = np.where(u_c < ratio / (1.0 + ratio), Channel.CARBON, Channel.HYDROGEN)
    channel = np.where(u_bg < gen.background_fraction, Channel.BACKGROUND, channel).astype(np.int8)
    accidental = u_acc < cfg.timing.random_pair_fraction
    ev.channel = channel
    ev.accidental = accidental

    r = streams.stream(cfg.seed, block, streams.STAGE_KINEMATICS)
    for ch in (Channel.HYDROGEN, Channel.CARBON, Channel.BACKGROUND):
        m = channel == ch
        k = int(m.sum())
        report.channel_counts[{0: "H", 1: "C", 2: "BG"}[int(ch)]] = k
        if not k:
            continue
        if ch is Channel.BACKGROUND:
            kin = generate_background_event(gen, r, k)
        else:
            kin = generate_signal_event(gen, ch, r, k)
        ev.p1[m], ev.p2[m], ev.relative_ke_true[m] = kin.p1, kin.p2, kin.relative_ke_true
        report.regenerated += kin.regenerated

    # accidental pairs come from different decays, so their spins are uncorrelated
    correlated = (channel != Channel.BACKGROUND) & ~accidental
    ev.spin_model = np.where(correlated, cfg.source.code, SOURCE_CODES[SourceKind.UNPOLARIZED]).astype(np.int8)
    if cfg.source.has_hidden_azimuth:
        r = streams.stream(cfg.seed, block, streams.STAGE_HIDDEN)
        lam = sample_hidden_state(cfg.source, r, n)
        ev.hidden_deg = np.where(correlated, lam, np.nan)

    sample_scatter(ev, cfg.analyzer, streams.stream(cfg.seed, block, streams.STAGE_SCATTER), cfg.source.response)
    stamp_times(ev, accidental, cfg.timing, streams.stream(cfg.seed, block, streams.STAGE_TIMING), bunch_offset=k_acc)
    report.n_accidental = int(accidental.sum())
    if keep < n:
        ev = ev.take(slice(0, keep))
        report = GenerationReport(cfg.seed, keep, regenerated=report.regenerated)
        for tag, ch in (("H", 0), ("C", 1), ("BG", 2)):
            report.channel_counts[tag] = int(np.sum(ev.channel == ch))
        report.n_accidental = int(ev.accidental.sum())
    return ev, report


def _block_job(args):
    cfg, block = args
    return generate_block(cfg, block)


def generate_range(cfg: RunConfig, start: int = 0, stop=None, workers: int = 1):
    """Events with ids in [start, stop); identical for any ``workers``."""
    stop = cfg.n_events if stop is None else min(stop, cfg.n_events)
    blocks = list(streams.blocks_for_range(start, stop))
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_job, [(cfg, b) for b in blocks]))
    else:
        parts = [generate_block(cfg, b) for b in blocks]
    report = GenerationReport(cfg.seed)
    for _, rep in parts:
        report.merge(rep)
    events = EventBatch.concat(ev for ev, _ in parts)
    if len(events):
        keep = (events.event_id >= start) & (events.event_id < stop)
        if not keep.all():
            events = events.take(keep)
            # channel counts refer to whole blocks; recount for the slice
            regenerated = report.regenerated
            report = GenerationReport(cfg.seed, len(events), regenerated=regenerated)
            for tag, ch in (("H", 0), ("C", 1), ("BG", 2)):
                report.channel_counts[tag] = int(np.sum(events.channel == ch))
            report.n_accidental = int(events.accidental.sum())
    return events, report
