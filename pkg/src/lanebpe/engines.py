"""Merge engines: one sequential reference and two lane-parallel variants.

All three produce identical token streams for the same inputs. The lane
engines model a fixed-width block of lanes executing in lockstep: each
pass evaluates every adjacent pair (lanes striding across the sequence),
reduces to the single lowest-rank pair (leftmost on ties), applies that
one merge, and compacts the sequence by one slot. The two variants differ
only in how they compact:

  baseline   uses a flag-array + exclusive-prefix-sum compaction
             (compact_scan) while the sequence still fits in one lane
             width, and switches to compact_double_buffer beyond it;
             the regime is re-evaluated every pass as the sequence
             shrinks.
  optimized  always uses compact_double_buffer, which derives each
             destination slot in O(1) from the merge position.

Because every lane observes the same reduced (rank, position) winner,
outputs are invariant to lane count and scheduling; the numpy
implementation computes the same reduction without simulating lanes
individually.
"""

from __future__ import annotations

import sys
import threading
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, SequenceTooLong
from .merge_table import U32_MASK, PackedPairTable, ProbeScratch

_U64_SENTINEL = np.uint64(0xFFFF_FFFF_FFFF_FFFF)
_LITTLE_ENDIAN = sys.byteorder == "little"


@dataclass(frozen=True)
class BlockConfig:
    """Execution-shape settings shared by the lane engines.

    lane_count   lanes per block; affects scheduling only, never output.
    max_seq_len  longest sequence a single engine run accepts.
    chunk_budget longest chunk the batch path feeds an engine; must not
                 exceed max_seq_len (and defaults to it).
    """

    lane_count: int = 256
    max_seq_len: int = 8192
    chunk_budget: int | None = None

    def __post_init__(self):
        if self.chunk_budget is None:
            object.__setattr__(self, "chunk_budget", self.max_seq_len)
        if self.lane_count < 1:
            raise ValueError(f"lane_count must be >= 1, got {self.lane_count}")
        if self.max_seq_len < 2:
            raise ValueError(f"max_seq_len must be >= 2, got {self.max_seq_len}")
        if not 2 <= self.chunk_budget <= self.max_seq_len:
            raise ValueError(
                f"chunk_budget must be in [2, max_seq_len={self.max_seq_len}], "
                f"got {self.chunk_budget}"
            )


@dataclass(frozen=True)
class PairCandidate:
    """Winning pair of one evaluation pass."""

    pos: int
    rank: int
    new_token: int


@dataclass
class PassCounters:
    """Work accounting for one engine run (or an aggregate of runs).

    passes             merges applied; always input length - output length.
    lookups            pair lookups issued against the merge table.
    compaction_moves   tokens written while compacting, one per surviving
                       token per pass.
    buffer_allocations buffers acquired from the per-worker pool.
    """

    passes: int = 0
    lookups: int = 0
    compaction_moves: int = 0
    buffer_allocations: int = 0

    def merge_from(self, other: "PassCounters") -> None:
        self.passes += other.passes
        self.lookups += other.lookups
        self.compaction_moves += other.compaction_moves
        self.buffer_allocations += other.buffer_allocations


def token_seq(ids) -> np.ndarray:
    """Coerce a token-id sequence to a 1-D uint32 array."""
    arr = np.asarray(ids, dtype=np.uint32)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    return arr


class _EvalScratch:
    """Per-run buffers for eval_pairs: pair keys, ranks, and probe scratch."""

    __slots__ = ("width", "keys", "ranks", "notfound", "probe")

    def __init__(self, width: int):
        self.width = width
        self.keys = np.empty(width, dtype=np.uint64)
        self.ranks = np.empty(width, dtype=np.uint64)
        self.notfound = np.empty(width, dtype=bool)
        self.probe = ProbeScratch(width)


def _pack_adjacent_pairs(tokens: np.ndarray, keys: np.ndarray) -> None:
    """Fill keys[i] = (tokens[i] << 32) | tokens[i + 1] without temporaries."""
    if _LITTLE_ENDIAN:
        halves = keys.view(np.uint32)
        halves[0::2] = tokens[1:]  # low word
        halves[1::2] = tokens[:-1]  # high word
    else:
        np.copyto(keys, tokens[:-1])
        keys <<= np.uint64(32)
        keys |= tokens[1:]


def eval_pairs(
    tokens: np.ndarray,
    table: PackedPairTable,
    config: BlockConfig | None = None,
    counters: PassCounters | None = None,
    scratch: _EvalScratch | None = None,
) -> PairCandidate | None:
    """Find the lowest-rank adjacent mergeable pair, leftmost on ties.

    Models lanes striding over positions 0..len-2 and block-reducing their
    per-lane minima; the reduction is associative and total, so the result
    is independent of config.lane_count and computed here as one argmin.
    Returns None when no adjacent pair is in the table. scratch, when
    given, must be at least len(tokens) - 1 wide.
    """
    n = len(tokens)
    if n < 2:
        return None
    m = n - 1
    if counters is not None:
        counters.lookups += m
    if scratch is None or scratch.width < m:
        scratch = _EvalScratch(m)
    keys = scratch.keys[:m]
    _pack_adjacent_pairs(tokens, keys)
    hit, vals = table.lookup_keys_into(keys, scratch.probe)
    ranks = scratch.ranks[:m]
    np.bitwise_and(vals, np.uint64(U32_MASK), out=ranks)
    notfound = scratch.notfound[:m]
    np.logical_not(hit, out=notfound)
    np.copyto(ranks, _U64_SENTINEL, where=notfound)
    pos = int(np.argmin(ranks))  # argmin takes the first minimum: leftmost tie-break
    if int(ranks[pos]) == int(_U64_SENTINEL):
        return None
    packed = int(vals[pos])
    return PairCandidate(pos, packed & U32_MASK, packed >> 32)


def compact_scan(
    tokens: np.ndarray, best_pos: int, new_token: int, out: np.ndarray | None = None
) -> np.ndarray:
    """Apply one merge via flag array + exclusive prefix sum.

    Marks the slot right of the merge for removal, prefix-sums the flags,
    and scatters every kept token to (index - removed_before). The merged
    slot keeps its index and receives new_token. out, when given, must not
    overlap tokens and must hold at least len(tokens) - 1 entries.
    """
    n = len(tokens)
    if not 0 <= best_pos < n - 1:
        raise OutOfRange(f"best_pos {best_pos} not a pair position in length {n}")
    remove = np.zeros(n, dtype=np.uint32)
    remove[best_pos + 1] = 1
    removed_before = np.cumsum(remove, dtype=np.uint32) - remove  # exclusive scan
    if out is None:
        out = np.empty(n - 1, dtype=np.uint32)
    result = out[: n - 1]
    keep = remove == 0
    dst = np.arange(n, dtype=np.int64) - removed_before
    result[dst[keep]] = tokens[keep]
    result[best_pos] = new_token
    return result


def compact_double_buffer(
    tokens: np.ndarray, best_pos: int, new_token: int, out: np.ndarray | None = None
) -> np.ndarray:
    """Apply one merge by writing into a second buffer.

    Each source index maps directly to its destination: indices at or
    before the merge keep their slot, the slot right of the merge is
    skipped, and everything after shifts left by one. No prefix sum and
    no ordering constraints between writes. out, when given, must not
    overlap tokens and must hold at least len(tokens) - 1 entries.
    """
    n = len(tokens)
    if not 0 <= best_pos < n - 1:
        raise OutOfRange(f"best_pos {best_pos} not a pair position in length {n}")
    if out is None:
        out = np.empty(n - 1, dtype=np.uint32)
    result = out[: n - 1]
    result[:best_pos] = tokens[:best_pos]
    result[best_pos] = new_token
    result[best_pos + 1 :] = tokens[best_pos + 2 :]
    return result


class _BufferPool:
    """Per-worker free list of uint32 scratch buffers, keyed by size."""

    def __init__(self):
        self._free: dict[int, list[np.ndarray]] = {}

    def acquire(self, size: int) -> np.ndarray:
        stack = self._free.get(size)
        if stack:
            return stack.pop()
        return np.empty(size, dtype=np.uint32)

    def release(self, buf: np.ndarray) -> None:
        self._free.setdefault(len(buf), []).append(buf)


_worker_local = threading.local()


def _buffer_pool() -> _BufferPool:
    pool = getattr(_worker_local, "pool", None)
    if pool is None:
        pool = _BufferPool()
        _worker_local.pool = pool
    return pool


# Fault injection for divergence testing: when armed, the next engine run
# shifts one pass's compaction position by one slot.
_fault_armed = threading.local()


@contextmanager
def inject_compaction_fault():
    """Arm a one-shot compaction fault for engine runs in this thread."""
    _fault_armed.flag = True
    try:
        yield
    finally:
        _fault_armed.flag = False


def _take_fault() -> bool:
    if getattr(_fault_armed, "flag", False):
        _fault_armed.flag = False
        return True
    return False


def sequential_bpe(
    tokens, table: PackedPairTable, trace: list[int] | None = None
) -> tuple[np.ndarray, PassCounters]:
    """Reference engine: repeatedly merge the lowest-rank adjacent pair.

    Semantics are the naive loop (rescan, merge the global minimum-rank
    pair at its leftmost occurrence, repeat until no pair is in the
    table); implemented with a heap over live pair positions so each merge
    costs O(log n) instead of a rescan. trace, when given, receives the
    rank of every merge in application order.
    """
    from heapq import heappop, heappush

    counters = PassCounters()
    ids = [int(t) for t in tokens]
    n = len(ids)
    if n < 2:
        return np.asarray(ids, dtype=np.uint32), counters

    # Doubly linked list over positions; heap entries are validated
    # against current ids before use, so stale entries are skipped.
    nxt = list(range(1, n)) + [-1]
    prv = [-1] + list(range(n - 1))
    alive = [True] * n
    heap: list[tuple[int, int, int, int, int]] = []  # (rank, pos, left, right, new)

    lookup = table.lookup
    for i in range(n - 1):
        counters.lookups += 1
        hit = lookup(ids[i], ids[i + 1])
        if hit is not None:
            heappush(heap, (hit[1], i, ids[i], ids[i + 1], hit[0]))

    while heap:
        rank, pos, left_id, right_id, new_token = heappop(heap)
        if not alive[pos]:
            continue
        right = nxt[pos]
        # A slot's id only ever grows into longer symbols, so an id match
        # here proves the entry still describes the live pair.
        if right == -1 or ids[pos] != left_id or ids[right] != right_id:
            continue
        ids[pos] = new_token
        alive[right] = False
        after = nxt[right]
        nxt[pos] = after
        if after != -1:
            prv[after] = pos
        counters.passes += 1
        if trace is not None:
            trace.append(rank)
        before = prv[pos]
        if before != -1:
            counters.lookups += 1
            hit = lookup(ids[before], new_token)
            if hit is not None:
                heappush(heap, (hit[1], before, ids[before], new_token, hit[0]))
        if after != -1:
            counters.lookups += 1
            hit = lookup(new_token, ids[after])
            if hit is not None:
                heappush(heap, (hit[1], pos, new_token, ids[after], hit[0]))

    out = np.fromiter(
        (ids[i] for i in range(n) if alive[i]), dtype=np.uint32, count=n - counters.passes
    )
    return out, counters


def run_block_engine(
    tokens,
    table: PackedPairTable,
    config: BlockConfig | None = None,
    variant: str = "optimized",
    trace: list[int] | None = None,
) -> tuple[np.ndarray, PassCounters]:
    """Run the lane-parallel engine to a fixed point.

    One merge per pass: evaluate all adjacent pairs, reduce to the winning
    candidate, compact, repeat until no pair is mergeable. The baseline
    variant compacts with compact_scan while the current length fits in
    lane_count (checking again each pass) and compact_double_buffer
    otherwise; the optimized variant always double-buffers. Scratch
    buffers come from a per-worker pool.
    """
    if variant not in ("baseline", "optimized"):
        raise ValueError(f"unknown variant {variant!r}")
    if config is None:
        config = BlockConfig()
    src = token_seq(tokens)
    n = len(src)
    counters = PassCounters()
    if n > config.max_seq_len:
        raise SequenceTooLong(f"length {n} exceeds max_seq_len {config.max_seq_len}")
    if n < 2:
        return src.copy(), counters

    pool = _buffer_pool()
    front = pool.acquire(config.max_seq_len)
    back = pool.acquire(config.max_seq_len)
    counters.buffer_allocations += 2
    scratch = _EvalScratch(n - 1)
    fault_pending = _take_fault()
    try:
        front[:n] = src
        cur_len = n
        while cur_len >= 2:
            cand = eval_pairs(front[:cur_len], table, config, counters, scratch)
            if cand is None:
                break
            best_pos = cand.pos
            if fault_pending:
                # Corrupt exactly one pass: shift the merge position one
                # slot so the wrong token is replaced and dropped.
                if best_pos + 1 < cur_len - 1:
                    best_pos += 1
                    fault_pending = False
                elif best_pos > 0:
                    best_pos -= 1
                    fault_pending = False
            if variant == "baseline" and cur_len <= config.lane_count:
                compact_scan(front[:cur_len], best_pos, cand.new_token, out=back)
            else:
                compact_double_buffer(front[:cur_len], best_pos, cand.new_token, out=back)
            counters.passes += 1
            counters.compaction_moves += cur_len - 1
            if trace is not None:
                trace.append(cand.rank)
            front, back = back, front
            cur_len -= 1
        result = front[:cur_len].copy()
    finally:
        pool.release(front)
        pool.release(back)
    return result, counters
