"""Headered CSV event files.

Layout::

    # ppbell-events schema=1 truth=1 n_records=N
    event_id,source_tag,t1_ns,...
    <one row per pair>
    # end n_records=N

Floats are written in shortest round-trip form, so a file read back
reproduces the in-memory arrays bit for bit.
"""

from __future__ import annotations

import io
import os
import re
from pathlib import Path

import numpy as np
import pandas as pd

from .events import CHANNEL_FROM_TAG, CHANNEL_TAGS, EventBatch

SCHEMA_VERSION = 1
MAGIC = "ppbell-events"
HIDDEN_SENTINEL = -1.0

BASE_COLUMNS = [
    "event_id", "source_tag", "t1_ns", "t2_ns",
    "e1", "px1", "py1", "pz1", "e2", "px2", "py2", "pz2",
    "th1_deg", "phi1_deg", "th2_deg", "phi2_deg",
]
TRUTH_COLUMNS = ["spin_model", "hidden_azimuth_deg", "bunch_offset", "accidental"]

_HEADER_RE = re.compile(rf"^# {MAGIC} schema=(\S+) truth=([01]) n_records=(\d+)$")
_FOOTER_RE = re.compile(r"^# end n_records=(\d+)$")


class EventFileError(ValueError):
    pass


class SchemaError(EventFileError):
    pass


def columns(truth: bool):
    return BASE_COLUMNS + (TRUTH_COLUMNS if truth else [])


def to_frame(events: EventBatch, truth: bool = True) -> pd.DataFrame:
    tags = np.array([CHANNEL_TAGS[c] for c in sorted(CHANNEL_TAGS)])
    data = {
        "event_id": events.event_id,
        "source_tag": tags[events.channel.astype(int)] if len(events) else np.zeros(0, dtype=str),
        "t1_ns": events.t1,
        "t2_ns": events.t2,
    }
    for i, name in enumerate(("e", "px", "py", "pz")):
        data[f"{name}1"] = events.p1[:, i]
    for i, name in enumerate(("e", "px", "py", "pz")):
        data[f"{name}2"] = events.p2[:, i]
    data.update(th1_deg=events.th1, phi1_deg=events.phi1, th2_deg=events.th2, phi2_deg=events.phi2)
    if truth:
        data["spin_model"] = events.spin_model.astype(np.int64)
        data["hidden_azimuth_deg"] = np.where(np.isnan(events.hidden_deg), HIDDEN_SENTINEL, events.hidden_deg)
        data["bunch_offset"] = events.bunch_offset
        data["accidental"] = events.accidental.astype(np.int64)
    return pd.DataFrame(data, columns=columns(truth))


def write_events(path, events: EventBatch, truth: bool = True):
    frame = to_frame(events, truth)
    n = len(frame)
    body = frame.to_csv(index=False, lineterminator="\n")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {MAGIC} schema={SCHEMA_VERSION} truth={int(truth)} n_records={n}\n")
        fh.write(body)
        fh.write(f"# end n_records={n}\n")


def _last_line(path):
    with open(path, "rb") as fh:
        fh.seek(0, os.SEEK_END)
        size = fh.tell()
        fh.seek(max(size - 256, 0))
        tail = fh.read().decode("utf-8", errors="replace")
    ends_with_newline = tail.endswith("\n")
    lines = tail.splitlines()
    return (lines[-1] if lines else ""), ends_with_newline


def _count_lines(path):
    with open(path, "rb") as fh:
        return sum(chunk.count(b"\n") for chunk in iter(lambda: fh.read(1 << 20), b""))


def read_events(path) -> EventBatch:
    path = Path(path)
    try:
        with open(path) as fh:
            first = fh.readline().rstrip("\n")
            header = fh.readline().rstrip("\n")
    except OSError as exc:
        raise EventFileError(f"cannot read {path}: {exc}") from exc
    m = _HEADER_RE.match(first)
    if not m:
        raise SchemaError(f"{path}:1: not a {MAGIC} file")
    if m.group(1) != str(SCHEMA_VERSION):
        raise SchemaError(f"{path}:1: unsupported schema version {m.group(1)!r} (this reader handles {SCHEMA_VERSION})")
    truth = m.group(2) == "1"
    n_declared = int(m.group(3))
    expected = columns(truth)
    got = header.split(",")
    for i, name in enumerate(expected):
        if i >= len(got) or got[i] != name:
            found = got[i] if i < len(got) else "<missing>"
            raise SchemaError(f"{path}:2: schema v{SCHEMA_VERSION} expects column {i + 1} {name!r}, found {found!r}")
    if len(got) > len(expected):
        raise SchemaError(f"{path}:2: schema v{SCHEMA_VERSION} has no column {got[len(expected)]!r}")

    last, newline = _last_line(path)
    fm = _FOOTER_RE.match(last)
    if not fm or not newline:
        n_lines = _count_lines(path) + (0 if newline else 1)
        raise EventFileError(f"{path}:{n_lines}: file truncated (missing end marker)")
    if int(fm.group(1)) != n_declared:
        raise EventFileError(f"{path}: end marker count {fm.group(1)} != header count {n_declared}")

    try:
        frame = pd.read_csv(path, skiprows=1, comment="#", float_precision="round_trip",
                            dtype={"source_tag": str})
    except (pd.errors.ParserError, ValueError) as exc:
        raise EventFileError(f"{path}: {exc}") from exc
    if len(frame) != n_declared:
        raise EventFileError(f"{path}: found {len(frame)} records, header declares {n_declared}")
    bad = frame.isna().any(axis=1).to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        col = frame.columns[frame.iloc[row].isna().to_numpy()][0]
        raise EventFileError(f"{path}:{row + 3}: missing or non-numeric value in column {col!r}")
    return from_frame(frame, truth, path)


def from_frame(frame: pd.DataFrame, truth: bool, path="<frame>") -> EventBatch:
    n = len(frame)
    tags = frame["source_tag"].to_numpy()
    try:
        channel = np.array([CHANNEL_FROM_TAG[t] for t in tags], dtype=np.int8)
    except KeyError as exc:
        raise EventFileError(f"{path}: unknown source_tag {exc.args[0]!r}") from exc
    numeric = [c for c in frame.columns if c != "source_tag"]
    vals = {c: pd.to_numeric(frame[c], errors="coerce").to_numpy(dtype=float) for c in numeric}
    for c, v in vals.items():
        if not np.isfinite(v).all():
            row = int(np.flatnonzero(~np.isfinite(v))[0])
            raise EventFileError(f"{path}:{row + 3}: non-numeric or non-finite value in column {c!r}")
    ev = EventBatch.allocate(n)
    ev.event_id = vals["event_id"].astype(np.int64)
    ev.channel = channel
    ev.t1, ev.t2 = vals["t1_ns"], vals["t2_ns"]
    ev.p1 = np.stack([vals[f"{k}1"] for k in ("e", "px", "py", "pz")], axis=-1) if n else np.zeros((0, 4))
    ev.p2 = np.stack([vals[f"{k}2"] for k in ("e", "px", "py", "pz")], axis=-1) if n else np.zeros((0, 4))
    ev.th1, ev.phi1 = vals["th1_deg"], vals["phi1_deg"]
    ev.th2, ev.phi2 = vals["th2_deg"], vals["phi2_deg"]
    ev.has_truth = truth
    if truth:
        ev.spin_model = vals["spin_model"].astype(np.int8)
        h = vals["hidden_azimuth_deg"]
        ev.hidden_deg = np.where(h == HIDDEN_SENTINEL, np.nan, h)
        ev.bunch_offset = vals["bunch_offset"].astype(np.int64)
        ev.accidental = vals["accidental"].astype(bool)
    return ev


def write_histogram_csv(path, hist, x_name="bin_center", y_name="count"):
    buf = io.StringIO()
    buf.write(f"{x_name},{y_name}\n")
    for x, y in zip(hist.centers, hist.counts):
        buf.write(f"{float(x)!r},{int(y) if float(y).is_integer() else float(y)!r}\n")
    Path(path).write_text(buf.getvalue())
