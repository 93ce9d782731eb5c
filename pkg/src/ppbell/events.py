"""Columnar container for pair events.

One row per proton pair. Four-momenta are (n, 4) arrays ordered
(E, px, py, pz) in MeV and MeV/c, lab frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

import numpy as np


class Channel(enum.IntEnum):
    HYDROGEN = 0
    CARBON = 1
    BACKGROUND = 2


CHANNEL_TAGS = {Channel.HYDROGEN: "H", Channel.CARBON: "C", Channel.BACKGROUND: "BG"}
CHANNEL_FROM_TAG = {v: k for k, v in CHANNEL_TAGS.items()}


def _empty(dtype, *shape):
    return np.zeros((0, *shape), dtype=dtype)


@dataclass
class EventBatch:
    event_id: np.ndarray = field(default_factory=lambda: _empty(np.int64))
    channel: np.ndarray = field(default_factory=lambda: _empty(np.int8))
    p1: np.ndarray = field(default_factory=lambda: _empty(float, 4))
    p2: np.ndarray = field(default_factory=lambda: _empty(float, 4))
    th1: np.ndarray = field(default_factory=lambda: _empty(float))
    phi1: np.ndarray = field(default_factory=lambda: _empty(float))
    th2: np.ndarray = field(default_factory=lambda: _empty(float))
    phi2: np.ndarray = field(default_factory=lambda: _empty(float))
    t1: np.ndarray = field(default_factory=lambda: _empty(float))
    t2: np.ndarray = field(default_factory=lambda: _empty(float))
    # truth; NaN hidden azimuth means no per-pair hidden value
    spin_model: np.ndarray = field(default_factory=lambda: _empty(np.int8))
    hidden_deg: np.ndarray = field(default_factory=lambda: _empty(float))
    bunch_offset: np.ndarray = field(default_factory=lambda: _empty(np.int64))
    accidental: np.ndarray = field(default_factory=lambda: _empty(bool))
    relative_ke_true: np.ndarray = field(default_factory=lambda: _empty(float))
    has_truth: bool = True

    def __len__(self):
        return len(self.event_id)

    @classmethod
    def allocate(cls, n: int) -> "EventBatch":
        nan = np.full(n, np.nan)
        return cls(
            event_id=np.arange(n, dtype=np.int64),
            channel=np.zeros(n, np.int8),
            p1=np.full((n, 4), np.nan),
            p2=np.full((n, 4), np.nan),
            th1=nan.copy(), phi1=nan.copy(), th2=nan.copy(), phi2=nan.copy(),
            t1=nan.copy(), t2=nan.copy(),
            spin_model=np.zeros(n, np.int8),
            hidden_deg=nan.copy(),
            bunch_offset=np.zeros(n, np.int64),
            accidental=np.zeros(n, bool),
            relative_ke_true=nan.copy(),
        )

    def _arrays(self):
        return [f.name for f in fields(self) if f.name != "has_truth"]

    def take(self, index) -> "EventBatch":
        kw = {name: getattr(self, name)[index] for name in self._arrays()}
        return EventBatch(**kw, has_truth=self.has_truth)

    @classmethod
    def concat(cls, batches) -> "EventBatch":
        batches = list(batches)
        if not batches:
            return cls()
        names = batches[0]._arrays()
        kw = {name: np.concatenate([getattr(b, name) for b in batches]) for name in names}
        return cls(**kw, has_truth=all(b.has_truth for b in batches))

    @property
    def delta_t(self) -> np.ndarray:
        return self.t2 - self.t1

    def equals(self, other: "EventBatch") -> bool:
        if len(self) != len(other) or self.has_truth != other.has_truth:
            return False
        for name in self._arrays():
            a, b = getattr(self, name), getattr(other, name)
            if not np.array_equal(a, b, equal_nan=a.dtype.kind == "f"):
                return False
        return True
