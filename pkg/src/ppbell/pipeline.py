"""Reproducible runs: generate -> (file) -> offline analysis -> results document."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    EmptySample,
    bell_from_events,
    self_calibrate_analyzing_power,
    wigner_from_events,
)
from .cases import bell_case, emit_reference_tables, wigner_case
from .config import RunConfig
from .eventio import read_events, write_events, write_histogram_csv
from .events import EventBatch
from .generator import generate_range
from .kinematics import energy_sum_spectrum, selection_mask, SelectionReport
from .polarimeter import ScatterCut, accept_scatter
from .timing import Coincidence, classify_coincidence, delta_t_spectrum, random_subtraction_weights

RESULTS_SCHEMA = "ppbell-results/1"


def run_generate(cfg: RunConfig, path=None, workers: int = 1):
    """Simulate ``cfg.n_events`` pairs; optionally write them to ``path``."""
    events, report = generate_range(cfg, 0, cfg.n_events, workers=workers)
    if path is not None:
        write_events(path, events, truth=cfg.write_truth)
    return events, report


def prepare_sample(events: EventBatch, cfg: RunConfig):
    """Timing, kinematic and scatter cuts; returns (accepted events, weights, bookkeeping)."""
    opts = cfg.analysis
    classes = classify_coincidence(events.delta_t, cfg.timing) if len(events) else np.zeros(0, np.int8)
    timing = {
        "n_true": int(np.sum(classes == Coincidence.TRUE)),
        "n_random": int(np.sum(classes == Coincidence.RANDOM)),
        "n_outside": int(np.sum(classes == Coincidence.OUTSIDE)),
        "subtract_randoms": opts.subtract_randoms,
    }
    if opts.subtract_randoms:
        sub = random_subtraction_weights(classes, cfg.timing)
        timing["sideband_weight"] = sub.w
        keep = classes != Coincidence.OUTSIDE
        weights = sub.weights
    else:
        keep = classes == Coincidence.TRUE
        weights = np.ones(len(events))

    report = SelectionReport(n_input=len(events))
    report.cuts.append(("coincidence", int(keep.sum()), int((~keep).sum())))
    if len(events):
        win, rel = selection_mask(events.p1, events.p2, opts.relative_ke_cut_mev, cfg.generator.momentum_window_mevc)
    else:
        win = rel = np.zeros(0, bool)
    k1 = keep & win
    report.cuts.append(("momentum_window", int(k1.sum()), int(keep.sum() - k1.sum())))
    k2 = k1 & rel
    report.cuts.append(("relative_ke", int(k2.sum()), int(k1.sum() - k2.sum())))
    kin_selected = events.take(k2)

    if len(kin_selected):
        ok, reason = accept_scatter(kin_selected, cfg.analyzer)
    else:
        ok, reason = np.zeros(0, bool), np.zeros(0, np.int8)
    report.cuts.append(("scatter_band", int(ok.sum()), int((~ok).sum())))
    scatter = {c.name.lower(): int(np.sum(reason == c)) for c in ScatterCut}
    accepted = kin_selected.take(ok)
    return accepted, weights[k2][ok], {
        "timing": timing,
        "selection": report.as_dict(),
        "scatter": scatter,
        "kinematic_selected": kin_selected,
    }


def selected_sample(cfg: RunConfig, chunk_events: int = 1 << 20, workers: int = 1):
    """Accepted pairs and their weights for ``cfg.n_events`` generated events.

    Generation and selection run chunk by chunk so only the accepted pairs are
    held in memory. The result equals prepare_sample on the full batch.
    """
    parts, weights = [], []
    for start in range(0, cfg.n_events, chunk_events):
        events, _ = generate_range(cfg, start, min(start + chunk_events, cfg.n_events), workers=workers)
        accepted, w, _ = prepare_sample(events, cfg)
        parts.append(accepted)
        weights.append(w)
    if not parts:
        return EventBatch(), np.zeros(0)
    return EventBatch.concat(parts), np.concatenate(weights)


def _clean(obj):
    """JSON-safe copy: NaN/inf -> None, numpy scalars -> python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def analyze_events(events: EventBatch, cfg: RunConfig):
    """Results document (dict) plus spectra for the given events."""
    accepted, weights, book = prepare_sample(events, cfg)
    opts = cfg.analysis
    doc = {
        "schema": RESULTS_SCHEMA,
        "version": __version__,
        "config": cfg.to_dict(),
        "n_records": len(events),
        "timing": book["timing"],
        "selection": book["selection"],
        "scatter_acceptance": book["scatter"],
        "n_analyzed": len(accepted),
        "status": "ok",
        "analyzing_power": None,
        "bell": [],
        "wigner": [],
    }
    spectra = {
        "energy_sum": energy_sum_spectrum(book["kinematic_selected"], opts.energy_bin_mev),
        "delta_t": delta_t_spectrum(events, cfg.timing),
    }
    if len(accepted) == 0 or weights.sum() == 0.0:
        doc["status"] = "empty_sample"
        return _clean(doc), spectra

    calib = self_calibrate_analyzing_power(accepted, weights)
    if opts.a_source == "fixed":
        a = cfg.analyzer.analyzing_power
        doc["analyzing_power"] = {"source": "fixed", "value": a, "sigma": 0.0, "calibration": calib.as_dict()}
    else:
        doc["analyzing_power"] = {"source": "self_calibrated", "value": calib.a_est, "sigma": calib.sigma,
                                  "calibration": calib.as_dict()}
        a = calib.a_est
        if not calib.ok:
            doc["status"] = "calibration_failed"
            return _clean(doc), spectra
    if a <= 0.0:
        doc["status"] = "calibration_failed"
        return _clean(doc), spectra

    doc["bell"] = [bell_from_events(bell_case(i), accepted, a, weights).as_dict() for i in opts.bell_cases]
    doc["wigner"] = [wigner_from_events(wigner_case(i), accepted, a, weights).as_dict() for i in opts.wigner_cases]
    return _clean(doc), spectra


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_results(out_dir, doc, spectra):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.json").write_text(dumps(doc))
    write_histogram_csv(out / "energy_sum.csv", spectra["energy_sum"])
    write_histogram_csv(out / "delta_t.csv", spectra["delta_t"])
    for kind in ("bell", "wigner"):
        lines = ["case_id,measured,sigma,qm,limit"]
        for r in doc[kind]:
            lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in (
                r["case_id"], r["measured"], r["sigma"], r["prediction_qm"], r["classical_limit"])))
        (out / f"{kind}_cases.csv").write_text("\n".join(lines) + "\n")


def run_analyze(source, cfg: RunConfig, out_dir=None):
    """Analyze an event file (or an in-memory batch); returns the results document."""
    events = source if isinstance(source, EventBatch) else read_events(source)
    doc, spectra = analyze_events(events, cfg)
    if out_dir is not None:
        write_results(out_dir, doc, spectra)
    return doc


def run_pipeline(cfg: RunConfig, out_dir=None, events_path=None, workers: int = 1):
    events, report = run_generate(cfg, events_path, workers=workers)
    doc, spectra = analyze_events(events, cfg)
    if out_dir is not None:
        write_results(out_dir, doc, spectra)
    return doc, report


def run_calibrate(source, cfg: RunConfig):
    events = source if isinstance(source, EventBatch) else read_events(source)
    accepted, weights, _ = prepare_sample(events, cfg)
    if len(accepted) == 0:
        raise EmptySample("no events survive selection")
    return self_calibrate_analyzing_power(accepted, weights)


def write_reference_tables(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bell, wig = emit_reference_tables()
    (out / "table_bell.csv").write_text(bell)
    (out / "table_wigner.csv").write_text(wig)
    return out / "table_bell.csv", out / "table_wigner.csv"
