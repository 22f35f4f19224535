"""Command-line entry point.

Commands cover sieving statistics, gap histograms, the weighted and
damped gap sums (checkpointable), singular series values, and the
verification reports.  Two stable output schemas cover everything:

    snapshots:  limit,value,terms
    reports:    claim,params_json,empirical,predicted,ratio,notes

CSV output is locale independent ('.' decimal separator, LF endings,
17 significant digits) and starts with the full run configuration in
'#' comment lines.  Files are written to a temporary name and renamed
into place, so a failed run leaves no partial output.

Exit codes: 0 success, 1 validation or usage error, 2 capacity or
precision error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass

from . import checkpoint, engine, singular, sums, verify
from .errors import (
    CapacityError,
    CheckpointError,
    GapsumError,
    PrecisionError,
    ValidationError,
)

COMMANDS = (
    "sieve-stats",
    "gaps-histogram",
    "weighted-sum",
    "en-sum",
    "singular-pair",
    "singular-tuple",
    "verify-lemma21",
    "verify-lemma22",
    "verify-conjecture1",
    "verify-sieve-bound",
    "verify-theorem1",
    "verify-corollary",
    "sandwich",
)

SNAPSHOT_FIELDS = ["limit", "value", "terms"]
REPORT_FIELDS = ["claim", "params_json", "empirical", "predicted", "ratio", "notes"]


@dataclass
class RunConfig:
    """Everything a run needs; echoed into the output header."""

    command: str
    limit: int | None = None
    alpha: float | None = None
    c: float | None = None
    d: int | None = None
    d_list: list[int] | None = None
    offsets: list[int] | None = None
    truncation: int | None = None
    grid: list[int] | None = None
    samples: list[tuple[int, int]] | None = None
    mode: str = "prime"
    start_index: int | None = None
    workers: int = 1
    segment_slots: int | None = None
    output_format: str = "csv"
    output_path: str | None = None
    checkpoint_dir: str | None = None
    resume: str | None = None
    stop_after_segments: int | None = None
    snapshot_grid: list[int] | None = None

    def header_lines(self) -> list[str]:
        items = []
        for key, value in sorted(vars(self).items()):
            if value is None:
                continue
            items.append(f"# {key}={value}")
        return items


def parse_count(text: str) -> int:
    """Integer limits with scientific notation and underscores (1e9, 1_000_000)."""
    cleaned = text.replace("_", "")
    try:
        if any(ch in cleaned for ch in ".eE"):
            value = float(cleaned)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return int(cleaned)
    except (ValueError, OverflowError) as exc:
        raise ValidationError(f"cannot parse {text!r} as an integer count") from exc


def parse_int_list(text: str) -> list[int]:
    return [parse_count(part) for part in text.split(",") if part]

def parse_grid(text: str) -> list[int]:
    """Either a comma list or lo:hi:log (powers of ten from lo to hi)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or parts[2] != "log":
            raise ValidationError("grid must be 'lo:hi:log' or a comma-separated list")
        lo, hi = parse_count(parts[0]), parse_count(parts[1])
        if lo < 2 or hi < lo:
            raise ValidationError("grid bounds must satisfy 2 <= lo <= hi")
        out = []
        x = lo
        while x <= hi:
            out.append(x)
            x *= 10
        return out
    return parse_int_list(text)


def parse_samples(text: str) -> list[tuple[int, int]]:
    """Sieve-bound samples as 'h:d,h:d,...'."""
    out = []
    for part in text.split(","):
        if not part:
            continue
        h, _, d = part.partition(":")
        if not d:
            raise ValidationError("samples must look like 'h:d,h:d'")
        out.append((parse_count(h), parse_count(d)))
    return out


# ---------------------------------------------------------------------------
# Output writing

def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gapsum-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(config: RunConfig, fieldnames: list[str], rows: list[list]) -> str:
    path = config.output_path or f"gapsum-{config.command}.{config.output_format}"
    if config.output_format == "json":
        payload = [dict(zip(fieldnames, row)) for row in rows]
        _write_atomic(path, json.dumps(payload, indent=2) + "\n")
    else:
        buf = io.StringIO()
        for line in config.header_lines():
            buf.write(line + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow(row)
        _write_atomic(path, buf.getvalue())
    return path


def snapshot_rows(snaps: list[sums.SumSnapshot]) -> list[list]:
    return [[s.limit_reached, verify.format_float(s.value), s.terms] for s in snaps]


def report_rows(reports: list[verify.VerificationReport]) -> list[list]:
    return [r.to_csv_row() for r in reports]


# ---------------------------------------------------------------------------
# Argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with status 2 by default; usage errors are 1 here.
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="gapsum", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (GAPSUM_WORKERS overrides)")
        p.add_argument("--segment-size", type=parse_count, default=None, dest="segment_slots",
                       help="odd slots per sieve segment (power of two)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       dest="output_format")
        p.add_argument("--output", default=None, dest="output_path")
        return p

    p = add("sieve-stats", help="prime count and largest prime up to a limit")
    p.add_argument("--limit", type=parse_count, required=True)

    p = add("gaps-histogram", help="histogram of consecutive gaps")
    p.add_argument("--limit", type=parse_count, required=True)

    p = add("weighted-sum", help="sum of log^alpha(d_n)/d_n over the gap stream")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--mode", choices=("prime", "index"), default="prime")
    p.add_argument("--start-index", type=parse_count, default=None, dest="start_index")
    p.add_argument("--snapshot-grid", type=parse_grid, default=None, dest="snapshot_grid")
    p.add_argument("--checkpoint-dir", default=None, dest="checkpoint_dir")
    p.add_argument("--resume", default=None)
    p.add_argument("--stop-after-segments", type=int, default=None,
                   dest="stop_after_segments",
                   help="testing hook: stop after N segments, keeping the checkpoint")

    p = add("en-sum", help="sum of 1/(d_n n (loglog n)^c), n from 3")
    p.add_argument("--limit", type=parse_count, required=True, help="index limit")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--snapshot-grid", type=parse_grid, default=None, dest="snapshot_grid")
    p.add_argument("--checkpoint-dir", default=None, dest="checkpoint_dir")
    p.add_argument("--resume", default=None)
    p.add_argument("--stop-after-segments", type=int, default=None,
                   dest="stop_after_segments")

    p = add("singular-pair", help="S({0,d})")
    p.add_argument("--d", type=parse_count, required=True)

    p = add("singular-tuple", help="S(H) for a general tuple")
    p.add_argument("--offsets", type=parse_int_list, required=True,
                   help="comma separated, starting at 0")
    p.add_argument("--truncation", type=parse_count, default=singular.DEFAULT_TRUNCATION)

    p = add("verify-lemma21", help="pair singular sum error curve")
    p.add_argument("--grid", type=parse_grid, required=True)

    p = add("verify-lemma22", help="triple row sums against d * S({0,d})")
    p.add_argument("--d-list", type=parse_int_list, required=True, dest="d_list")
    p.add_argument("--truncation", type=parse_count, default=singular.DEFAULT_TRUNCATION)

    p = add("verify-conjecture1", help="pair counts against the conjectural main term")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--d-list", type=parse_int_list, required=True, dest="d_list")

    p = add("verify-sieve-bound", help="triple counts against the sieve upper bound")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--samples", type=parse_samples, default=None,
                   help="h:d pairs; default picks 20 admissible with d <= 50")

    p = add("verify-theorem1", help="weighted sum against its main term")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mode", choices=("prime", "index"), default="prime")

    p = add("verify-corollary", help="damped reciprocal series against its main term")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--c", type=float, required=True)

    p = add("sandwich", help="inclusion-exclusion bracket for one gap value")
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--d", type=parse_count, required=True)

    return parser


def _resolve_workers(cli_value: int | None) -> int:
    if os.environ.get("GAPSUM_WORKERS"):
        return engine.default_workers()
    if cli_value is not None:
        if cli_value < 1:
            raise ValidationError("--workers must be >= 1")
        return cli_value
    return engine.default_workers()


# ---------------------------------------------------------------------------
# Command implementations

def _streaming_config(cfg: RunConfig, mode: str, limit: int) -> dict:
    semantic = {
        "command": cfg.command,
        "mode": mode,
        "limit": limit,
        "segment_slots": engine.effective_segment_slots(limit, cfg.segment_slots),
        "snapshot_grid": cfg.snapshot_grid,
        "alpha": cfg.alpha,
        "c": cfg.c,
        "start_index": cfg.start_index,
    }
    return semantic


def _run_streaming(cfg: RunConfig) -> int:
    if cfg.command == "weighted-sum":
        mode = cfg.mode
        start = cfg.start_index
        if start is None:
            start = 2 if cfg.alpha < 0 else 1
        cfg.start_index = start
        weight = sums.WeightSpec(cfg.alpha, start)
        runner = lambda **kw: sums.weighted_gap_sum_series(
            weight,
            **{f"{mode}_limit": cfg.limit},
            **kw,
        )
    else:
        mode = "index"
        cfg.start_index = 3
        runner = lambda **kw: sums.erdos_nathanson_series(cfg.limit, cfg.c, **kw)

    grid = cfg.snapshot_grid
    if grid is None:
        grid = sums.default_snapshot_grid(cfg.limit)
        cfg.snapshot_grid = grid
    digest = checkpoint.config_digest(_streaming_config(cfg, mode, cfg.limit))

    resume_state = None
    if cfg.resume:
        ck = checkpoint.load(cfg.resume)
        checkpoint.verify_match(ck, mode, cfg.limit, digest)
        resume_state = ck.state

    on_segment = None
    ckpt_path = None
    if cfg.checkpoint_dir:
        os.makedirs(cfg.checkpoint_dir, exist_ok=True)
        ckpt_path = os.path.join(cfg.checkpoint_dir, f"gapsum-{cfg.command}.ckpt")
        on_segment = lambda st: checkpoint.save(
            ckpt_path, checkpoint.Checkpoint(mode, cfg.limit, st, digest)
        )
    if cfg.stop_after_segments is not None and ckpt_path is None:
        raise ValidationError("--stop-after-segments requires --checkpoint-dir")

    started = time.perf_counter()
    try:
        snaps = runner(
            snapshot_limits=grid,
            workers=cfg.workers,
            segment_slots=cfg.segment_slots,
            resume=resume_state,
            on_segment=on_segment,
            stop_after_segments=cfg.stop_after_segments,
        )
    except sums.RunInterrupted:
        print(f"run interrupted after {cfg.stop_after_segments} segments; "
              f"checkpoint saved at {ckpt_path}")
        return 0
    elapsed = time.perf_counter() - started
    path = write_rows(cfg, SNAPSHOT_FIELDS, snapshot_rows(snaps))
    final = snaps[-1]
    print(f"{cfg.command}: {mode} limit {cfg.limit}, "
          f"value {verify.format_float(final.value)}, terms {final.terms} "
          f"({elapsed:.2f}s)")
    if cfg.command == "en-sum" and cfg.c > 2:
        print(f"heuristic tail estimate (c > 2): "
              f"{verify.format_float(sums.en_heuristic_tail(cfg.limit, cfg.c))}")
    print(f"report written to {path}")
    return 0


def _run_command(cfg: RunConfig) -> int:
    if cfg.command in ("weighted-sum", "en-sum"):
        return _run_streaming(cfg)

    if cfg.command == "sieve-stats":
        started = time.perf_counter()
        count = engine.prime_count(cfg.limit, workers=cfg.workers,
                                   segment_slots=cfg.segment_slots)
        elapsed = time.perf_counter() - started
        rows = [[cfg.limit, verify.format_float(float(count)), count]]
        path = write_rows(cfg, SNAPSHOT_FIELDS, rows)
        print(f"pi({cfg.limit}) = {count} ({elapsed:.2f}s)")
        print(f"report written to {path}")
        return 0

    if cfg.command == "gaps-histogram":
        hist = engine.consecutive_gap_counts(cfg.limit, workers=cfg.workers,
                                             segment_slots=cfg.segment_slots)
        reports = [
            verify.VerificationReport(
                "gap_histogram", {"X": cfg.limit, "d": d}, float(c), None, None, ""
            )
            for d, c in sorted(hist.counts.items())
        ]
        path = write_rows(cfg, REPORT_FIELDS, report_rows(reports))
        print(f"gaps-histogram: {len(hist.counts)} distinct gaps, "
              f"span {hist.total_span()}")
        print(f"report written to {path}")
        return 0

    if cfg.command == "singular-pair":
        sv = singular.pair_singular(cfg.d)
        reports = [verify.VerificationReport(
            "singular_pair", {"d": cfg.d}, sv.value, None, None,
            f"abs_error={verify.format_float(sv.abs_error)}",
        )]
        path = write_rows(cfg, REPORT_FIELDS, report_rows(reports))
        print(f"S({{0,{cfg.d}}}) = {verify.format_float(sv.value)} "
              f"(+/- {verify.format_float(sv.abs_error)})")
        print(f"report written to {path}")
        return 0

    if cfg.command == "singular-tuple":
        sv = singular.tuple_singular(tuple(cfg.offsets), cfg.truncation)
        reports = [verify.VerificationReport(
            "singular_tuple",
            {"offsets": list(cfg.offsets), "P": cfg.truncation},
            sv.value, None, None,
            f"abs_error={verify.format_float(sv.abs_error)}",
        )]
        path = write_rows(cfg, REPORT_FIELDS, report_rows(reports))
        print(f"S({tuple(cfg.offsets)}) = {verify.format_float(sv.value)} "
              f"(+/- {verify.format_float(sv.abs_error)})")
        print(f"report written to {path}")
        return 0

    if cfg.command == "sandwich":
        res = sums.sandwich_check(cfg.limit, cfg.d, workers=cfg.workers,
                                  segment_slots=cfg.segment_slots)
        reports = [verify.VerificationReport(
            "sandwich", {"X": cfg.limit, "d": cfg.d}, float(res.middle), None, None,
            f"lower={res.lower};upper={res.upper};ok={res.ok}",
        )]
        path = write_rows(cfg, REPORT_FIELDS, report_rows(reports))
        print(f"sandwich X={cfg.limit} d={cfg.d}: "
              f"{res.lower} <= {res.middle} <= {res.upper} (ok={res.ok})")
        print(f"report written to {path}")
        return 0

    # Verification commands share the report flow.
    if cfg.command == "verify-lemma21":
        reports = verify.lemma21_error_curve(cfg.grid)
    elif cfg.command == "verify-lemma22":
        reports = verify.lemma22_ratio_curve(cfg.d_list, cfg.truncation)
    elif cfg.command == "verify-conjecture1":
        reports = verify.conjecture1_ratio(cfg.limit, cfg.d_list, workers=cfg.workers,
                                           segment_slots=cfg.segment_slots)
    elif cfg.command == "verify-sieve-bound":
        samples = cfg.samples or verify.default_sieve_samples()
        cfg.samples = samples
        reports = verify.sieve_bound_check(cfg.limit, samples, workers=cfg.workers,
                                           segment_slots=cfg.segment_slots)
    elif cfg.command == "verify-theorem1":
        reports = [verify.theorem1_ratio(cfg.limit, cfg.alpha, cfg.mode,
                                         workers=cfg.workers,
                                         segment_slots=cfg.segment_slots)]
    elif cfg.command == "verify-corollary":
        reports = [verify.corollary_ratio(cfg.limit, cfg.c, workers=cfg.workers,
                                          segment_slots=cfg.segment_slots)]
    else:
        raise ValidationError(f"unknown command {cfg.command!r}")

    path = write_rows(cfg, REPORT_FIELDS, report_rows(reports))
    for r in reports:
        ratio = "n/a" if r.ratio is None else f"{r.ratio:.6f}"
        print(f"{r.claim} {r.params}: empirical={r.empirical:.6g} ratio={ratio} {r.notes}")
    print(f"report written to {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(command=args.command)
        for key, value in vars(args).items():
            if key != "command" and hasattr(cfg, key):
                setattr(cfg, key, value)
        cfg.workers = _resolve_workers(args.workers)
        return _run_command(cfg)
    except (CapacityError, PrecisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CheckpointError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GapsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
