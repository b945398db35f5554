"""Command-line entry point: ``procmap mine|evaluate|bench|export|generate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import bench as benchmod
from . import export, ingest
from .errors import ParseError, ProcmapError, ZeroTotalFrequency
from .evaluate import evaluate, offline_dfg
from .graph import Snapshot

log = logging.getLogger("procmap")

EXIT_ERROR = 1
EXIT_ZERO_TOTAL = 3


def _events_from(source: str, order: str, strict: bool):
    if source == "stdin" or source == "-":
        return ingest.stdin_source(strict=strict)
    if source.startswith("tcp:"):
        host, _, port = source[4:].rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"bad tcp source {source!r}, expected tcp:<host>:<port>")
        return ingest.tcp_source(host, int(port), strict=strict)
    return ingest.replay(source, ingest.Order(order), strict=strict)


def _is_file_source(source: str) -> bool:
    return source not in ("stdin", "-") and not source.startswith("tcp:")


def _count_activities(path, strict) -> int:
    return len({e.activity for e in ingest.replay(path, ingest.Order.AS_IS, strict=strict)})


def _budget(text, source, strict):
    try:
        return benchmod.parse_budget(text)
    except ValueError:
        if not _is_file_source(source):
            raise
    return benchmod.parse_budget(text, _count_activities(source, strict))


def cmd_mine(args) -> int:
    source = args.source
    budget = _budget(args.bpm, source, args.strict)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = open(out / "trace.jsonl", "w", encoding="utf-8") if args.trace else None
    try:
        miner = benchmod.make_miner(args.policy, budget, args.brc, args.end_activity, args.case_ttl, trace)
        events = _events_from(source, args.order, args.strict)
        clock = time.perf_counter_ns
        observe, mem = miner.observe, miner.memory_words
        peak = 0
        spent = 0
        n = 0
        for event in events:
            t0 = clock()
            observe(event)
            spent += clock() - t0
            n += 1
            w = mem()
            if w > peak:
                peak = w
            if args.snapshot_every and n % args.snapshot_every == 0:
                _write_snapshot(miner.snapshot(), out / f"snapshot-{n:09d}", peak, n, None)
        ms = spent / n / 1e6 if n else 0.0
        _write_snapshot(miner.snapshot(), out / "final", peak, n, ms if args.timing else None)
    finally:
        if trace is not None:
            trace.close()
    summary = {"technique": miner.technique, "budget": budget, "events_processed": n,
               "peak_memory_words": peak, "peak_memory_bytes": 4 * peak}
    if args.timing:
        summary["ms_per_event"] = round(ms, 6)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _write_snapshot(snap: Snapshot, stem: Path, peak: int, n: int, ms):
    meta = dict(snap.meta, peak_memory_words=peak, events_processed=n)
    if ms is not None:
        meta["ms_per_event"] = round(ms, 6)
    snap = Snapshot(snap.nodes, snap.arcs, snap.idx, snap.starts, snap.ends, meta)
    export.write_snapshot(snap, stem.with_suffix(".json"), "json")
    export.write_snapshot(snap, stem.with_suffix(".dot"), "dot")


def _load_snapshot(path) -> Snapshot:
    return export.from_json(Path(path).read_text(encoding="utf-8"))


def cmd_evaluate(args) -> int:
    complete = offline_dfg(ingest.replay(args.log, ingest.Order(args.order), strict=args.strict))
    discovered = _load_snapshot(args.snapshot)
    meta = discovered.meta
    try:
        report = evaluate(complete, discovered,
                          memory_words=int(meta.get("peak_memory_words", 0)),
                          ms_per_event=float(meta.get("ms_per_event", 0.0)))
    except ZeroTotalFrequency as exc:
        print(f"procmap: {exc}", file=sys.stderr)
        return EXIT_ZERO_TOTAL
    if args.format in ("json", "both"):
        print(json.dumps(report.to_dict(), sort_keys=True))
    if args.format in ("csv", "both"):
        row = benchmod.BenchRow(report.technique or "unknown", report.budget or 0,
                                float(report.accuracy), report.memory_words,
                                report.ms_per_event, report.events_processed)
        benchmod.write_rows([row], sys.stdout)
    return 0


def cmd_bench(args) -> int:
    events = list(ingest.replay(args.log, ingest.Order(args.order), strict=args.strict))
    complete = offline_dfg(events)
    techniques = [t.strip().lower() for t in args.techniques.split(",") if t.strip()]
    for t in techniques:
        if t not in benchmod.TECHNIQUES:
            raise ValueError(f"unknown technique {t!r}")
    n_act = len(complete.nodes)
    if args.budgets == "auto":
        n_cases = len({e.case_id for e in events})
        budgets = benchmod.default_budgets(techniques, n_act, n_cases, args.points)
    else:
        budgets = sorted({benchmod.parse_budget(b, n_act) for b in args.budgets.split(",") if b.strip()})
    rows = benchmod.bench(events, techniques, budgets, args.brc, args.end_activity, args.case_ttl,
                          timing=args.timing, complete=complete)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            benchmod.write_rows(rows, fh, timing=args.timing)
    else:
        benchmod.write_rows(rows, sys.stdout, timing=args.timing)
    return 0


def cmd_export(args) -> int:
    snap = _load_snapshot(args.snapshot)
    text = export.to_json(snap) if args.format == "json" else export.to_dot(snap, args.with_start_end)
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate(args) -> int:
    model = ingest.SyntheticModel.zipf(args.activities, interleaving=args.interleaving, seed=args.seed,
                                       exponent=args.exponent, out_degree=args.out_degree)
    gen = ingest.generate(model, args.events)
    if args.out and args.out != "-":
        ingest.write_events(gen.events, args.out)
    else:
        ingest.write_events(gen.events, sys.stdout)
    if args.truth:
        Path(args.truth).write_text(export.to_json(gen.dfg), encoding="utf-8")
    print("end activities: " + ",".join(sorted(model.end_activities)), file=sys.stderr)
    return 0


def _common(p):
    p.add_argument("--order", choices=[o.value for o in ingest.Order], default="by-timestamp",
                   help="replay order for log files (default: by-timestamp)")
    p.add_argument("--strict", dest="strict", action="store_true", default=True,
                   help="abort on the first malformed record (default)")
    p.add_argument("--lenient", dest="strict", action="store_false",
                   help="skip malformed records with a warning")


def _miner_flags(p):
    p.add_argument("--brc", type=int, default=10_000, help="running-case budget")
    p.add_argument("--end-activity", action="append", default=[], metavar="NAME",
                   help="activity that closes its case (repeatable)")
    p.add_argument("--case-ttl", type=int, default=None, metavar="MS",
                   help="expire cases running longer than this many milliseconds")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="omit wall-clock columns so output is byte-reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procmap", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine a process map from an event source")
    p.add_argument("--source", default="stdin", help="log file path, 'stdin', or tcp:<host>:<port>")
    p.add_argument("--policy", choices=benchmod.TECHNIQUES, default="lfu")
    p.add_argument("--bpm", "--budget", dest="bpm", default="1000",
                   help="map budget: element count, losslessN or directedN")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="N")
    p.add_argument("--out", default="procmap-out", help="output directory")
    p.add_argument("--trace", action="store_true", help="write trace.jsonl, one line per event")
    _miner_flags(p)
    _common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("evaluate", help="score a snapshot against the exact graph of a log")
    p.add_argument("log")
    p.add_argument("snapshot")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="sweep techniques and budgets over a log")
    p.add_argument("log")
    p.add_argument("--techniques", default=",".join(benchmod.TECHNIQUES))
    p.add_argument("--budgets", default="auto", help="'auto' or comma-separated budgets")
    p.add_argument("--points", type=int, default=12, help="points per technique for auto sweeps")
    p.add_argument("--out", default="-", help="CSV path (default: stdout)")
    p.add_argument("--format", choices=["csv"], default="csv")
    _miner_flags(p)
    _common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="convert a JSON snapshot to DOT or JSON")
    p.add_argument("snapshot")
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--with-start-end", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("generate", help="write a synthetic Zipf-skewed event log")
    p.add_argument("--activities", type=int, default=20)
    p.add_argument("--events", type=int, default=10_000)
    p.add_argument("--interleaving", type=int, default=10)
    p.add_argument("--exponent", type=float, default=1.2)
    p.add_argument("--out-degree", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--truth", help="also write the exact graph as a JSON snapshot")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="procmap: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ProcmapError, ParseError, ValueError, OSError) as exc:
        print(f"procmap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
