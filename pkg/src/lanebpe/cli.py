"""Command-line interface.

Subcommands: tokenize (text -> token ids), verify (cross-check all
engines), bench (latency/throughput sweep), profile (counters and time
splits). Settings resolve as flags > LANEBPE_* environment variables >
defaults. Exit codes: 0 success, 1 usage error, 2 data or parse error,
3 verification divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bench import SweepSpec, emit_report, make_windows, profile_run, run_sweep
from .chunker import ENGINE_NAMES, Tokenizer, tokenize_batch
from .engines import BlockConfig, inject_compaction_fault
from .errors import TokenizerError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3

ENV_PREFIX = "LANEBPE_"


class _UsageError(Exception):
    """Bad flag/option combination detected after argparse."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract reserves
    # 2 for data errors, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _resolve(flag_value, env_name: str, default, cast):
    if flag_value is not None:
        return flag_value
    raw = _env(env_name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"{ENV_PREFIX}{env_name}={raw!r}: {exc}") from exc


@dataclass(frozen=True)
class CliConfig:
    """Fully resolved settings for one command invocation."""

    vocab_path: Path
    merges_path: Path
    engine: str
    lane_count: int
    max_seq_len: int
    chunk_budget: int
    workers: int | None
    seed: int

    def block_config(self) -> BlockConfig:
        return BlockConfig(
            lane_count=self.lane_count,
            max_seq_len=self.max_seq_len,
            chunk_budget=self.chunk_budget,
        )


def _config_from(args) -> CliConfig:
    vocab = _resolve(args.vocab, "VOCAB", None, str)
    merges = _resolve(args.merges, "MERGES", None, str)
    if vocab is None or merges is None:
        raise _UsageError("--vocab and --merges are required (or set LANEBPE_VOCAB/LANEBPE_MERGES)")
    engine = _resolve(getattr(args, "engine", None), "ENGINE", "optimized", str)
    if engine not in ENGINE_NAMES:
        raise _UsageError(f"unknown engine {engine!r}, expected one of {ENGINE_NAMES}")
    max_seq_len = _resolve(args.max_seq_len, "MAX_SEQ_LEN", 8192, int)
    chunk_budget = _resolve(args.chunk_budget, "CHUNK_BUDGET", max_seq_len, int)
    config = CliConfig(
        vocab_path=Path(vocab),
        merges_path=Path(merges),
        engine=engine,
        lane_count=_resolve(args.lane_count, "LANE_COUNT", 256, int),
        max_seq_len=max_seq_len,
        chunk_budget=chunk_budget,
        workers=_resolve(args.workers, "WORKERS", None, int),
        seed=_resolve(getattr(args, "seed", None), "SEED", 0, int),
    )
    try:
        config.block_config()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    return config


def _load_tokenizer(config: CliConfig) -> Tokenizer:
    return Tokenizer.from_files(config.vocab_path, config.merges_path, config.block_config())


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _split_docs(data: bytes, whole_file: bool) -> list[bytes]:
    """One document per line by default; trailing newline ends the last line."""
    if not data:
        return []
    if whole_file:
        return [data]
    if data.endswith(b"\n"):
        data = data[:-1]
    return data.split(b"\n")


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_tokenize(args) -> int:
    config = _config_from(args)
    tokenizer = _load_tokenizer(config)
    docs = _split_docs(_read_input(args.input), args.whole_file)
    if not docs:
        return EXIT_OK
    result = tokenize_batch(docs, tokenizer, config.engine, workers=config.workers)
    if args.format == "json":
        text = json.dumps([ids.tolist() for ids in result.token_ids]) + "\n"
    else:
        text = "\n\n".join(
            "\n".join(str(int(t)) for t in ids) for ids in result.token_ids
        ) + "\n"
    _write_output(text, args.output)
    return EXIT_OK


def _first_diff(a: np.ndarray, b: np.ndarray) -> int | None:
    n = min(len(a), len(b))
    if n:
        mism = np.nonzero(a[:n] != b[:n])[0]
        if len(mism):
            return int(mism[0])
    return n if len(a) != len(b) else None


def cmd_verify(args) -> int:
    config = _config_from(args)
    tokenizer = _load_tokenizer(config)
    docs = _split_docs(_read_input(args.corpus), args.whole_file)
    if not docs:
        print("verified 0 sequences across 3 engines: 0 divergences")
        return EXIT_OK
    outputs = {}
    for engine in ("sequential", "baseline"):
        outputs[engine] = tokenize_batch(docs, tokenizer, engine, workers=config.workers).token_ids
    if args.inject_fault:
        # Fault arming is thread-local, so run in-thread with one worker.
        with inject_compaction_fault():
            outputs["optimized"] = tokenize_batch(docs, tokenizer, "optimized", workers=1).token_ids
    else:
        outputs["optimized"] = tokenize_batch(
            docs, tokenizer, "optimized", workers=config.workers
        ).token_ids
    pairs = (("sequential", "baseline"), ("sequential", "optimized"), ("baseline", "optimized"))
    divergent_docs = 0
    first_report = None
    for i in range(len(docs)):
        doc_diverged = False
        for left, right in pairs:
            pos = _first_diff(outputs[left][i], outputs[right][i])
            if pos is not None:
                doc_diverged = True
                if first_report is None:
                    first_report = (i, left, right, pos)
        divergent_docs += doc_diverged
    print(f"verified {len(docs)} sequences across 3 engines: {divergent_docs} divergences")
    if divergent_docs:
        i, left, right, pos = first_report
        print(f"first divergence: sequence {i}, {left} vs {right}, token index {pos}")
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _config_from(args)
    tokenizer = _load_tokenizer(config)
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    for engine in engines:
        if engine not in ENGINE_NAMES:
            raise _UsageError(f"unknown engine {engine!r}, expected one of {ENGINE_NAMES}")
    if not engines:
        raise _UsageError("--engines must name at least one engine")
    try:
        lengths = tuple(int(v) for v in args.lengths.split(",")) if args.lengths else None
        spec = SweepSpec(
            **({"lengths": lengths} if lengths else {}),
            samples_per_length=args.samples,
            warmup_runs=args.warmup,
            measured_runs=args.runs,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    corpus = Path(args.corpus).read_bytes()
    windows = make_windows(corpus, None, spec, seed=config.seed)
    records = run_sweep(
        windows, engines, spec, tokenizer,
        golden_dir=args.golden, workers=config.workers or 1,
    )
    _write_output(emit_report(records, args.format, args.baseline_engine), args.out)
    if args.golden is not None:
        total = sum(r.golden_divergences or 0 for r in records)
        if total:
            print(f"golden comparison: {total} divergences", file=sys.stderr)
            return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_profile(args) -> int:
    config = _config_from(args)
    tokenizer = _load_tokenizer(config)
    docs = _split_docs(_read_input(args.corpus), args.whole_file)
    report = profile_run(docs, tokenizer, config.engine)
    c = report.counters
    payload = {
        "engine": config.engine,
        "counters": {
            "passes": c.passes,
            "lookups": c.lookups,
            "compaction_moves": c.compaction_moves,
            "buffer_allocations": c.buffer_allocations,
        },
        "event_shares": report.event_shares,
        "encode_ms": report.encode_ms,
        "engine_ms": report.engine_ms,
        "assemble_ms": report.assemble_ms,
        "end_to_end_ms": report.end_to_end_ms,
    }
    if args.format == "json":
        _write_output(json.dumps(payload, indent=2) + "\n", None)
    else:
        lines = [f"engine: {config.engine}"]
        for key, val in payload["counters"].items():
            share = report.event_shares[key]
            lines.append(f"{key:>20}: {val:>12}  ({share:6.2%} of events)")
        lines.append(f"{'encode_ms':>20}: {report.encode_ms:12.3f}")
        lines.append(f"{'engine_ms':>20}: {report.engine_ms:12.3f}")
        lines.append(f"{'assemble_ms':>20}: {report.assemble_ms:12.3f}")
        lines.append(f"{'end_to_end_ms':>20}: {report.end_to_end_ms:12.3f}")
        _write_output("\n".join(lines) + "\n", None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lanebpe", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vocab", help="vocabulary JSON file (env LANEBPE_VOCAB)")
    common.add_argument("--merges", help="merges text file (env LANEBPE_MERGES)")
    common.add_argument("--lane-count", type=int, dest="lane_count",
                        help="lanes per block (default 256)")
    common.add_argument("--max-seq-len", type=int, dest="max_seq_len",
                        help="engine sequence limit (default 8192)")
    common.add_argument("--chunk-budget", type=int, dest="chunk_budget",
                        help="chunk size for long inputs (default: max-seq-len)")
    common.add_argument("--workers", type=int, help="worker threads (default: cpu count)")
    common.add_argument("--whole-file", action="store_true",
                        help="treat the whole input as one document instead of one per line")

    sub = parser.add_subparsers(dest="cmd")

    p_tok = sub.add_parser("tokenize", parents=[common], help="tokenize text to ids")
    p_tok.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
    p_tok.add_argument("--engine", choices=ENGINE_NAMES, help="engine (default optimized)")
    p_tok.add_argument("-o", "--output", help="output file (default stdout)")
    p_tok.add_argument("--format", choices=("ids", "json"), default="ids",
                       help="ids: one per line, blank line between documents; json: array of arrays")
    p_tok.set_defaults(func=cmd_tokenize)

    p_ver = sub.add_parser("verify", parents=[common],
                           help="run all engines and cross-check outputs")
    p_ver.add_argument("corpus", nargs="?", default="-", help="corpus file, or - for stdin")
    p_ver.add_argument("--inject-fault", action="store_true",
                       help="corrupt one compaction to prove divergence detection works")
    p_ver.set_defaults(func=cmd_verify, engine=None)

    p_bench = sub.add_parser("bench", parents=[common], help="latency/throughput sweep")
    p_bench.add_argument("--corpus", required=True, help="text corpus to cut windows from")
    p_bench.add_argument("--lengths", help="comma-separated window lengths "
                         "(default 256,1024,4096,16384,131072)")
    p_bench.add_argument("--samples", type=int, default=3, help="windows per length")
    p_bench.add_argument("--warmup", type=int, default=3, help="untimed runs per cell")
    p_bench.add_argument("--runs", type=int, default=10, help="timed runs per cell")
    p_bench.add_argument("--engines", default="sequential,baseline,optimized",
                         help="comma-separated engines to sweep")
    p_bench.add_argument("--baseline-engine", dest="baseline_engine",
                         help="engine speedups are measured against (default: first)")
    p_bench.add_argument("--format", choices=("csv", "json", "table"), default="table")
    p_bench.add_argument("--out", help="write report here instead of stdout")
    p_bench.add_argument("--golden", help="directory of golden token files to compare against")
    p_bench.add_argument("--seed", type=int, help="window sampling seed (default 0)")
    p_bench.set_defaults(func=cmd_bench, engine=None)

    p_prof = sub.add_parser("profile", parents=[common],
                            help="counter totals and time splits for one batch")
    p_prof.add_argument("corpus", nargs="?", default="-", help="corpus file, or - for stdin")
    p_prof.add_argument("--engine", choices=ENGINE_NAMES, help="engine (default optimized)")
    p_prof.add_argument("--format", choices=("json", "table"), default="json")
    p_prof.set_defaults(func=cmd_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "cmd", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"lanebpe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TokenizerError as exc:
        print(f"lanebpe: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"lanebpe: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
