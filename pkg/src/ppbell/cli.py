"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 empty sample.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .analysis import EmptySample
from .config import ConfigError, load_config
from .eventio import EventFileError
from .kinematics import GenerationExhausted
from .pipeline import dumps, run_analyze, run_calibrate, run_generate, run_pipeline, write_reference_tables
from .timing import DegenerateSideband

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_EMPTY = 0, 2, 3, 4

log = logging.getLogger("ppbell")


def _config_args(p):
    p.add_argument("-c", "--config", help="TOML run configuration")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("-n", "--n-events", type=int, help="number of pairs (overrides config)")
    p.add_argument("--source", help="spin source: quantum_singlet, lhv_vector, lhv_deterministic, unpolarized")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config field, e.g. --set generator.peak_sigma_mev=1.5")


def _load(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if getattr(args, "n_events", None) is not None:
        overrides.append(f"n_events={args.n_events}")
    if getattr(args, "source", None):
        overrides.append(f'source.kind="{args.source}"')
    return load_config(args.config, overrides)


def _status_code(doc):
    if doc["status"] == "empty_sample":
        return EXIT_EMPTY
    if doc["status"] != "ok":
        return EXIT_DATA
    return EXIT_OK


def _summary(doc):
    a = doc.get("analyzing_power") or {}
    print(f"status: {doc['status']}  analyzed pairs: {doc['n_analyzed']}  A = {a.get('value')}")
    for r in doc["bell"]:
        print(f"  bell case {r['case_id']}: {r['measured']:.3f} +/- {r['sigma']:.3f}  "
              f"(qm {r['prediction_qm']:.3f}, limit {r['classical_limit']:g})  {r['verdict']}")
    for r in doc["wigner"]:
        print(f"  wigner case {r['case_id']}: {r['measured']:+.3f} +/- {r['sigma']:.3f}  "
              f"(qm {r['prediction_qm']:+.4f}, limit {r['classical_limit']:g})  {r['verdict']}")


def cmd_generate(args):
    cfg = _load(args)
    _, report = run_generate(cfg, args.out, workers=args.workers)
    print(json.dumps(report.as_dict(), sort_keys=True))
    return EXIT_OK


def cmd_analyze(args):
    cfg = _load(args)
    doc = run_analyze(args.events, cfg, args.out_dir)
    _summary(doc)
    return _status_code(doc)


def cmd_pipeline(args):
    cfg = _load(args)
    doc, report = run_pipeline(cfg, args.out_dir, args.events_out, workers=args.workers)
    log.info("generated %s", report.as_dict())
    _summary(doc)
    return _status_code(doc)


def cmd_calibrate(args):
    cfg = _load(args)
    res = run_calibrate(args.events, cfg)
    print(dumps(res.as_dict()), end="")
    return EXIT_OK if res.ok else EXIT_DATA


def cmd_tables(args):
    for path in write_reference_tables(args.out_dir):
        print(path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ppbell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate pairs and write an event file")
    _config_args(p)
    p.add_argument("-o", "--out", required=True, help="event file to write")
    p.add_argument("-j", "--workers", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="offline analysis of an event file")
    p.add_argument("events")
    _config_args(p)
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pipeline", help="generate and analyze in one pass")
    _config_args(p)
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("--events-out", help="also write the intermediate event file")
    p.add_argument("-j", "--workers", type=int, default=1)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("calibrate", help="self-calibrate the analyzing power only")
    p.add_argument("events")
    _config_args(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("tables", help="write the reference Bell and Wigner tables as CSV")
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationExhausted as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptySample as exc:
        print(f"empty sample: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (EventFileError, DegenerateSideband) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
