"""Merge rules packed into a flat open-addressing hash table.

A merge rule (left, right) -> new_token with priority rank is stored as
one 64-bit key and one 64-bit value:

    key   = (left << 32) | right
    value = (new_token << 32) | rank

The table is a power-of-two array probed linearly from a mixed hash of
the key. Capacity is the smallest power of two holding all rules at no
more than 50% load, which keeps probe chains short without resizing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .byte_codec import Vocab
from .errors import DuplicatePair, MalformedLine, ReservedKey, UnknownSymbol

U32_MASK = 0xFFFF_FFFF
U64_MASK = 0xFFFF_FFFF_FFFF_FFFF

# All-ones key marks an empty slot; the pair (0xFFFFFFFF, 0xFFFFFFFF) is
# therefore unstorable and rejected at build time.
EMPTY_KEY = U64_MASK

_MIX_A = 0xFF51_AFD7_ED55_8CCD
_MIX_B = 0xC4CE_B9FE_1A85_EC53


def pack_key(left: int, right: int) -> int:
    """Pack a token pair into one 64-bit key. Assumes ids fit in 32 bits."""
    return (left << 32) | right


def pack_value(new_token: int, rank: int) -> int:
    """Pack a rule's replacement id and rank into one 64-bit value."""
    return (new_token << 32) | rank


def unpack_value(value: int) -> tuple[int, int]:
    """Inverse of pack_value: (new_token, rank)."""
    return value >> 32, value & U32_MASK


def _mix64(x: int) -> int:
    """64-bit finalizer-style avalanche mix (scalar)."""
    x &= U64_MASK
    x ^= x >> 33
    x = (x * _MIX_A) & U64_MASK
    x ^= x >> 33
    x = (x * _MIX_B) & U64_MASK
    x ^= x >> 33
    return x


def _mix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized _mix64 over a uint64 array."""
    out = x.astype(np.uint64, copy=True)
    tmp = np.empty_like(out)
    _mix64_inplace(out, tmp)
    return out


def _mix64_inplace(x: np.ndarray, tmp: np.ndarray) -> None:
    """_mix64 on a uint64 array, in place, with caller-provided scratch."""
    np.right_shift(x, np.uint64(33), out=tmp)
    np.bitwise_xor(x, tmp, out=x)
    np.multiply(x, np.uint64(_MIX_A), out=x)
    np.right_shift(x, np.uint64(33), out=tmp)
    np.bitwise_xor(x, tmp, out=x)
    np.multiply(x, np.uint64(_MIX_B), out=x)
    np.right_shift(x, np.uint64(33), out=tmp)
    np.bitwise_xor(x, tmp, out=x)


@dataclass(frozen=True)
class MergeRule:
    left: int
    right: int
    rank: int
    new_token: int


def parse_merges(merges_text: str | bytes, vocab: Vocab) -> list[MergeRule]:
    """Parse merges-file text into rules ranked by line order.

    Each line holds exactly two space-separated symbols; the rule's
    replacement is the id of their concatenation. A first line starting
    with '#' is a header and skipped. Rank 0 is the first rule line.
    """
    if isinstance(merges_text, (bytes, bytearray)):
        merges_text = merges_text.decode("utf-8")
    lines = merges_text.splitlines()
    start = 1 if lines and lines[0].startswith("#") else 0
    symbol_to_id = vocab.symbol_to_id
    rules: list[MergeRule] = []
    for rank, line in enumerate(lines[start:]):
        fields = line.split(" ")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise MalformedLine(f"line {start + rank + 1}: expected two symbols, got {line!r}")
        left_sym, right_sym = fields
        merged_sym = left_sym + right_sym
        try:
            left = symbol_to_id[left_sym]
            right = symbol_to_id[right_sym]
            new_token = symbol_to_id[merged_sym]
        except KeyError as exc:
            raise UnknownSymbol(
                f"line {start + rank + 1}: symbol {exc.args[0]!r} not in vocabulary"
            ) from exc
        rules.append(MergeRule(left, right, rank, new_token))
    return rules


class ProbeScratch:
    """Reusable buffers for repeated vectorized probes up to a fixed width.

    Probing a merge loop's pair array every pass would otherwise allocate
    several temporaries per pass; one scratch reused across passes keeps
    the hot loop allocation-free.
    """

    __slots__ = ("width", "idx", "tmp", "slots", "vals", "hit", "aux", "res")

    def __init__(self, width: int):
        self.width = width
        self.idx = np.empty(width, dtype=np.uint64)
        self.tmp = np.empty(width, dtype=np.uint64)
        self.slots = np.empty(width, dtype=np.uint64)
        self.vals = np.empty(width, dtype=np.uint64)
        self.hit = np.empty(width, dtype=bool)
        self.aux = np.empty(width, dtype=bool)
        self.res = np.empty(width, dtype=bool)


class PackedPairTable:
    """Read-only open-addressing table from packed pair keys to packed values.

    Build through build_table; the constructor trusts its arrays.
    """

    __slots__ = ("keys", "values", "capacity", "count", "_mask")

    def __init__(self, keys: np.ndarray, values: np.ndarray, count: int):
        self.keys = keys
        self.values = values
        self.capacity = len(keys)
        self.count = count
        self._mask = self.capacity - 1

    def lookup(self, left: int, right: int) -> tuple[int, int] | None:
        """Return (new_token, rank) for the pair, or None if absent."""
        key = pack_key(left, right)
        if key == EMPTY_KEY:
            return None  # unstorable pair, can never be present
        idx = _mix64(key) & self._mask
        keys = self.keys
        while True:
            slot = int(keys[idx])
            if slot == key:
                return unpack_value(int(self.values[idx]))
            if slot == EMPTY_KEY:
                return None
            idx = (idx + 1) & self._mask

    def lookup_keys_into(
        self, probe_keys: np.ndarray, scratch: ProbeScratch
    ) -> tuple[np.ndarray, np.ndarray]:
        """Probe many packed keys at once, allocation-free on the fast path.

        Returns views (hit, values) of width len(probe_keys) into scratch;
        values are meaningful only where hit is True, and both views are
        overwritten by the next call. The first probe round is done for
        the whole batch in place; only pairs landing in occupied foreign
        slots enter the (rare) follow-up rounds.
        """
        m = len(probe_keys)
        idx = scratch.idx[:m]
        tmp = scratch.tmp[:m]
        slots = scratch.slots[:m]
        vals = scratch.vals[:m]
        hit = scratch.hit[:m]
        aux = scratch.aux[:m]
        res = scratch.res[:m]
        if m == 0:
            return hit, vals
        mask = np.uint64(self._mask)
        empty = np.uint64(EMPTY_KEY)

        np.copyto(idx, probe_keys)
        _mix64_inplace(idx, tmp)
        np.bitwise_and(idx, mask, out=idx)
        np.take(self.keys, idx, out=slots, mode="clip")
        np.take(self.values, idx, out=vals, mode="clip")
        np.equal(slots, probe_keys, out=hit)
        np.equal(slots, empty, out=aux)
        np.logical_or(hit, aux, out=res)
        # A probe key equal to the empty sentinel matches empty slots; such
        # a pair is unstorable, so cancel those false hits.
        np.logical_not(aux, out=aux)
        np.logical_and(hit, aux, out=hit)

        if not res.all():
            rows = np.nonzero(~res)[0]
            sub_keys = probe_keys[rows]
            sub_idx = idx[rows]
            one = np.uint64(1)
            # Every probe chain ends at an empty slot (table is at most
            # half full), so the active set shrinks every round.
            while len(rows):
                sub_idx += one
                np.bitwise_and(sub_idx, mask, out=sub_idx)
                sub_slots = self.keys[sub_idx]
                sub_empty = sub_slots == empty
                # Empty-first ordering: a sentinel-valued probe key must end
                # its chain as a miss, not match the empty slot.
                sub_hit = (sub_slots == sub_keys) & ~sub_empty
                if sub_hit.any():
                    found_rows = rows[sub_hit]
                    hit[found_rows] = True
                    vals[found_rows] = self.values[sub_idx[sub_hit]]
                keep = ~(sub_hit | sub_empty)
                rows = rows[keep]
                sub_idx = sub_idx[keep]
                sub_keys = sub_keys[keep]
        return hit, vals

    def lookup_pairs(
        self, left: np.ndarray, right: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Probe many pairs at once.

        Returns (found, new_tokens, ranks) arrays; new_tokens and ranks
        are meaningful only where found is True.
        """
        n = len(left)
        probe_keys = (left.astype(np.uint64) << np.uint64(32)) | right.astype(np.uint64)
        hit, vals = self.lookup_keys_into(probe_keys, ProbeScratch(n))
        return hit, vals >> np.uint64(32), vals & np.uint64(U32_MASK)


def build_table(rules: list[MergeRule]) -> PackedPairTable:
    """Build a PackedPairTable from rules, erroring on duplicates.

    Capacity is the smallest power of two >= 2 * len(rules) (minimum 1),
    enforcing the at-most-half-full invariant.
    """
    count = len(rules)
    capacity = 1
    while capacity < 2 * count:
        capacity <<= 1
    keys = np.full(capacity, EMPTY_KEY, dtype=np.uint64)
    values = np.zeros(capacity, dtype=np.uint64)
    mask = capacity - 1
    for rule in rules:
        key = pack_key(rule.left, rule.right)
        if key == EMPTY_KEY:
            raise ReservedKey(
                f"pair ({rule.left}, {rule.right}) packs to the empty-slot sentinel"
            )
        idx = _mix64(key) & mask
        while True:
            slot = int(keys[idx])
            if slot == EMPTY_KEY:
                break
            if slot == key:
                raise DuplicatePair(
                    f"pair ({rule.left}, {rule.right}) already inserted at rank "
                    f"{unpack_value(int(values[idx]))[1]}, duplicated at rank {rule.rank}"
                )
            idx = (idx + 1) & mask
        keys[idx] = key
        values[idx] = pack_value(rule.new_token, rule.rank)
    return PackedPairTable(keys, values, count)
