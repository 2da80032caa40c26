"""Benchmark sweeps, report emission, golden comparison, and profiling."""

from __future__ import annotations

import csv
import io
import json
import random
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chunker import Tokenizer, tokenize_batch
from .engines import PassCounters
from .errors import CorpusTooSmall, EmptyRecords, MalformedGoldenFile

DEFAULT_LENGTHS = (256, 1024, 4096, 16384, 131072)


@dataclass(frozen=True)
class SweepSpec:
    """Shape of a benchmark sweep.

    lengths must be ascending; each (engine, length) cell runs
    warmup_runs untimed batches then measured_runs timed ones over the
    same samples_per_length windows.
    """

    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    samples_per_length: int = 3
    warmup_runs: int = 3
    measured_runs: int = 10

    def __post_init__(self):
        if not self.lengths:
            raise ValueError("lengths must be nonempty")
        if any(n < 1 for n in self.lengths):
            raise ValueError(f"lengths must be positive, got {self.lengths}")
        if list(self.lengths) != sorted(self.lengths):
            raise ValueError(f"lengths must be ascending, got {self.lengths}")
        for name in ("samples_per_length", "warmup_runs", "measured_runs"):
            if getattr(self, name) < (0 if name == "warmup_runs" else 1):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class BenchRecord:
    """One (engine, length) measurement."""

    engine: str
    seq_len: int
    mean_latency_ms: float
    std_latency_ms: float
    throughput_tokens_per_s: float
    golden_matches: int | None = None
    golden_divergences: int | None = None


@dataclass(frozen=True)
class GoldenReport:
    """Outcome of comparing a token sequence against a golden file."""

    match: bool
    first_divergence: int | None
    divergences: int


@dataclass
class ProfileReport:
    """Counter totals and wall-time splits for one profiled batch."""

    counters: PassCounters
    encode_ms: float
    engine_ms: float
    assemble_ms: float
    end_to_end_ms: float
    event_shares: dict[str, float] = field(default_factory=dict)


def make_windows(
    corpus: bytes,
    golden_tokens,
    spec: SweepSpec,
    tokenizer: Tokenizer | None = None,
    seed: int = 0,
) -> dict[int, list[bytes]]:
    """Cut deterministic fixed-length windows for each sweep length.

    Without golden_tokens, windows are byte slices of the corpus. With
    golden_tokens (requires tokenizer for decoding), windows are slices of
    the token stream decoded back to bytes, so window boundaries land on
    token boundaries and every engine still receives identical raw bytes.
    """
    if not corpus:
        raise CorpusTooSmall("corpus is empty")
    if golden_tokens is not None and tokenizer is None:
        raise ValueError("token-space windows require a tokenizer for decoding")
    rng = random.Random(seed)
    windows: dict[int, list[bytes]] = {}
    for length in spec.lengths:
        if golden_tokens is not None:
            if len(golden_tokens) < length:
                raise CorpusTooSmall(
                    f"golden stream has {len(golden_tokens)} tokens, window needs {length}"
                )
            cuts = []
            for _ in range(spec.samples_per_length):
                off = rng.randrange(len(golden_tokens) - length + 1)
                cuts.append(tokenizer.decode(golden_tokens[off : off + length]))
            windows[length] = cuts
        else:
            if len(corpus) < length:
                raise CorpusTooSmall(
                    f"corpus has {len(corpus)} bytes, window needs {length}"
                )
            windows[length] = [
                corpus[off : off + length]
                for off in (
                    rng.randrange(len(corpus) - length + 1)
                    for _ in range(spec.samples_per_length)
                )
            ]
    return windows


def load_golden_file(path: str | Path) -> list[int]:
    """Read golden token ids: one id per line, or a JSON array."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.strip()
    if not stripped:
        return []
    if stripped[0] == "[":
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise MalformedGoldenFile(f"{path}: {exc}") from exc
        if not isinstance(data, list) or any(
            isinstance(v, bool) or not isinstance(v, int) for v in data
        ):
            raise MalformedGoldenFile(f"{path}: JSON payload is not an array of ints")
        return data
    ids = []
    for lineno, line in enumerate(stripped.splitlines(), start=1):
        try:
            ids.append(int(line.strip()))
        except ValueError as exc:
            raise MalformedGoldenFile(f"{path} line {lineno}: {line!r} is not an id") from exc
    return ids


def compare_golden(tokens, golden_path: str | Path) -> GoldenReport:
    """Compare a token sequence against a golden file, position by position.

    A length mismatch counts every unpaired trailing position as a
    divergence.
    """
    golden = load_golden_file(golden_path)
    produced = [int(t) for t in tokens]
    overlap = min(len(produced), len(golden))
    first = None
    divergences = 0
    for i in range(overlap):
        if produced[i] != golden[i]:
            divergences += 1
            if first is None:
                first = i
    tail = max(len(produced), len(golden)) - overlap
    if tail and first is None:
        first = overlap
    divergences += tail
    return GoldenReport(match=divergences == 0, first_divergence=first, divergences=divergences)


def _golden_path(golden_dir: Path, length: int, sample: int) -> Path:
    return golden_dir / f"len{length}_s{sample:03d}.tokens"


def run_sweep(
    windows: dict[int, list[bytes]],
    engines,
    spec: SweepSpec,
    tokenizer: Tokenizer,
    golden_dir: str | Path | None = None,
    workers: int = 1,
) -> list[BenchRecord]:
    """Benchmark each engine over each window length, one cell at a time.

    Per cell: one untimed batch checks outputs (and, when golden_dir is
    given, compares each window against <dir>/len<L>_s<NNN>.tokens), then
    warmup_runs untimed batches, then measured_runs timed batches over the
    same windows. Latency is per-batch mean; throughput counts base tokens
    (bytes) processed per second of mean batch time.
    """
    records: list[BenchRecord] = []
    for engine in engines:
        for length in spec.lengths:
            cell = windows[length]
            reference = tokenize_batch(cell, tokenizer, engine, workers=workers)
            matches = divergences = None
            if golden_dir is not None:
                matches = divergences = 0
                for k, ids in enumerate(reference.token_ids):
                    report = compare_golden(ids, _golden_path(Path(golden_dir), length, k))
                    matches += report.match
                    divergences += report.divergences
            for _ in range(spec.warmup_runs):
                tokenize_batch(cell, tokenizer, engine, workers=workers)
            times = []
            for _ in range(spec.measured_runs):
                start = time.perf_counter()
                tokenize_batch(cell, tokenizer, engine, workers=workers)
                times.append(time.perf_counter() - start)
            mean_s = statistics.fmean(times)
            std_s = statistics.stdev(times) if len(times) > 1 else 0.0
            records.append(
                BenchRecord(
                    engine=engine,
                    seq_len=length,
                    mean_latency_ms=mean_s * 1000.0,
                    std_latency_ms=std_s * 1000.0,
                    throughput_tokens_per_s=length * len(cell) / mean_s,
                    golden_matches=matches,
                    golden_divergences=divergences,
                )
            )
    return records


def emit_report(records: list[BenchRecord], fmt: str, baseline_engine: str | None = None) -> str:
    """Render benchmark records as csv, json, or an aligned table.

    Speedups are relative to baseline_engine (default: the first record's
    engine) at the same length: baseline mean latency / record mean
    latency.
    """
    if not records:
        raise EmptyRecords("no benchmark records to report")
    if fmt not in ("csv", "json", "table"):
        raise ValueError(f"unknown report format {fmt!r}")
    baseline = baseline_engine if baseline_engine is not None else records[0].engine
    base_latency = {
        r.seq_len: r.mean_latency_ms for r in records if r.engine == baseline
    }
    speedup_col = f"speedup_vs_{baseline}"

    def speedup(rec: BenchRecord) -> float | None:
        base = base_latency.get(rec.seq_len)
        if base is None or rec.mean_latency_ms == 0.0:
            return None
        return base / rec.mean_latency_ms

    with_golden = any(r.golden_matches is not None for r in records)

    if fmt == "csv":
        buf = io.StringIO()
        cols = ["engine", "seq_len", "mean_latency_ms", "std_latency_ms",
                "throughput", speedup_col]
        if with_golden:
            cols += ["golden_matches", "golden_divergences"]
        writer = csv.writer(buf)
        writer.writerow(cols)
        for rec in records:
            row = [
                rec.engine,
                rec.seq_len,
                repr(rec.mean_latency_ms),
                repr(rec.std_latency_ms),
                repr(rec.throughput_tokens_per_s),
                "" if speedup(rec) is None else repr(speedup(rec)),
            ]
            if with_golden:
                row += [
                    "" if rec.golden_matches is None else rec.golden_matches,
                    "" if rec.golden_divergences is None else rec.golden_divergences,
                ]
            writer.writerow(row)
        return buf.getvalue()

    if fmt == "json":
        payload = []
        for rec in records:
            entry = {
                "engine": rec.engine,
                "seq_len": rec.seq_len,
                "mean_latency_ms": rec.mean_latency_ms,
                "std_latency_ms": rec.std_latency_ms,
                "throughput": rec.throughput_tokens_per_s,
                speedup_col: speedup(rec),
            }
            if with_golden:
                entry["golden_matches"] = rec.golden_matches
                entry["golden_divergences"] = rec.golden_divergences
            payload.append(entry)
        return json.dumps(payload, indent=2) + "\n"

    # table: lengths as rows, engines as columns, mean latency in ms. The
    # speedup column tracks the last swept engine against the baseline.
    engines = list(dict.fromkeys(r.engine for r in records))
    lengths = sorted({r.seq_len for r in records})
    cell = {(r.engine, r.seq_len): r for r in records}
    subject = next((e for e in reversed(engines) if e != baseline), engines[-1])
    header = ["seq_len"] + [f"{e} (ms)" for e in engines] + [f"{subject} {speedup_col}"]
    rows = [header]
    for length in lengths:
        row = [str(length)]
        for e in engines:
            rec = cell.get((e, length))
            row.append("-" if rec is None else f"{rec.mean_latency_ms:.3f}")
        rec = cell.get((subject, length))
        ratio = None if rec is None else speedup(rec)
        row.append("-" if ratio is None else f"{ratio:.2f}x")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(col.rjust(w) for col, w in zip(row, widths)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def profile_run(texts, tokenizer: Tokenizer, variant: str = "optimized") -> ProfileReport:
    """Tokenize one batch single-threaded and report counters and splits.

    Single-threaded so the encode/engine/assemble splits sum to at most
    the end-to-end wall time. event_shares divides the four counter
    totals by their sum (all zeros when the batch did no work).
    """
    start = time.perf_counter()
    result = tokenize_batch(texts, tokenizer, variant, workers=1)
    end_to_end_ms = (time.perf_counter() - start) * 1000.0
    c = result.counters
    total_events = c.passes + c.lookups + c.compaction_moves + c.buffer_allocations
    shares = {
        "passes": c.passes,
        "lookups": c.lookups,
        "compaction_moves": c.compaction_moves,
        "buffer_allocations": c.buffer_allocations,
    }
    event_shares = {
        k: (v / total_events if total_events else 0.0) for k, v in shares.items()
    }
    return ProfileReport(
        counters=c,
        encode_ms=result.encode_ms,
        engine_ms=result.engine_time_ms,
        assemble_ms=result.assemble_ms,
        end_to_end_ms=end_to_end_ms,
        event_shares=event_shares,
    )
