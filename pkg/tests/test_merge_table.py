import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lanebpe as lb
from lanebpe.errors import DuplicatePair, MalformedLine, ReservedKey, UnknownSymbol
from lanebpe.merge_table import EMPTY_KEY, _mix64, _mix64_np, ProbeScratch

token_ids = st.integers(min_value=0, max_value=2**32 - 1)


def test_pack_key_frozen():
    assert lb.pack_key(0, 0) == 0
    assert lb.pack_key(3, 5) == (3 << 32) | 5 == 12884901893
    assert lb.pack_key(2**32 - 1, 2**32 - 1) == 2**64 - 1 == EMPTY_KEY


def test_pack_value_roundtrip_frozen():
    assert lb.unpack_value(lb.pack_value(1169, 42)) == (1169, 42)
    assert lb.pack_value(1, 0) == 1 << 32


@given(token_ids, token_ids)
def test_pack_key_injective(a, b):
    key = lb.pack_key(a, b)
    assert key >> 32 == a
    assert key & (2**32 - 1) == b


@given(token_ids, token_ids)
def test_pack_value_roundtrip(new_token, rank):
    assert lb.unpack_value(lb.pack_value(new_token, rank)) == (new_token, rank)


def test_mix64_scalar_matches_vector():
    rng = random.Random(3)
    xs = [rng.randrange(2**64) for _ in range(500)] + [0, 1, EMPTY_KEY]
    arr = np.array(xs, dtype=np.uint64)
    mixed = _mix64_np(arr)
    for x, m in zip(xs, mixed.tolist()):
        assert _mix64(x) == m


def test_mix64_spreads_near_keys():
    # Adjacent keys must not cluster into adjacent slots.
    slots = {_mix64(lb.pack_key(100, i)) & 1023 for i in range(64)}
    assert len(slots) > 48


def test_parse_merges_tiny(tiny):
    got = [(r.left, r.right, r.rank, r.new_token) for r in tiny.rules]
    assert got == [
        (5, 9, 0, 100),
        (100, 13, 1, 101),
        (13, 21, 2, 103),
        (34, 55, 3, 105),
        (9, 13, 4, 107),
    ]


def test_parse_header_skipped_only_when_hash(tiny):
    with_header = "#version: test\n" + tiny.merges_text
    assert lb.parse_merges(with_header, tiny.vocab) == tiny.rules
    # No header: the first line is a rule, ranks shift accordingly.
    assert lb.parse_merges(tiny.merges_text, tiny.vocab)[0].rank == 0


def test_parse_accepts_bytes(tiny):
    assert lb.parse_merges(tiny.merges_text.encode(), tiny.vocab) == tiny.rules


def test_parse_malformed_lines(tiny):
    for bad in ("a\n", "a b c\n", "a  b\n", "\na b\n"):
        with pytest.raises(MalformedLine):
            lb.parse_merges(bad, tiny.vocab)


def test_parse_unknown_symbol(tiny):
    with pytest.raises(UnknownSymbol):
        lb.parse_merges("a z\n", tiny.vocab)
    # Pair symbols known but their concatenation missing.
    with pytest.raises(UnknownSymbol):
        lb.parse_merges("a d\n", tiny.vocab)


def test_parse_duplicate_rule_rejected_at_build(tiny):
    rules = lb.parse_merges("a b\na b\n", tiny.vocab)
    with pytest.raises(DuplicatePair):
        lb.build_table(rules)


def test_parse_official_shape(rules, vocab):
    assert len(rules) == 50000
    assert [r.rank for r in rules[:3]] == [0, 1, 2]
    first = rules[0]
    # First shipped rule merges the space symbol with "t".
    assert first.left == vocab.symbol_to_id["Ġ"]
    assert first.right == vocab.symbol_to_id["t"]
    assert first.new_token == vocab.symbol_to_id["Ġt"]


def test_capacity_power_of_two(tiny, table):
    assert lb.build_table(tiny.rules).capacity == 16  # 5 rules -> 2*5=10 -> 16
    assert table.capacity == 131072  # 50000 rules -> 100000 -> 131072
    assert table.count / table.capacity <= 0.5


def test_empty_table():
    empty = lb.build_table([])
    assert empty.capacity == 1
    assert empty.lookup(1, 2) is None


def test_reserved_key_rejected():
    rule = lb.MergeRule(left=2**32 - 1, right=2**32 - 1, rank=0, new_token=7)
    with pytest.raises(ReservedKey):
        lb.build_table([rule])


def test_reserved_key_lookup_is_absent(tiny):
    assert tiny.table.lookup(2**32 - 1, 2**32 - 1) is None
    left = np.array([2**32 - 1], dtype=np.uint32)
    found, _, _ = tiny.table.lookup_pairs(left, left)
    assert not found[0]


def test_lookup_tiny(tiny):
    assert tiny.table.lookup(5, 9) == (100, 0)
    assert tiny.table.lookup(100, 13) == (101, 1)
    assert tiny.table.lookup(9, 5) is None
    assert tiny.table.lookup(0, 0) is None


def test_lookup_official_all_rules(table, rules):
    for r in rules:
        assert table.lookup(r.left, r.right) == (r.new_token, r.rank)


def test_lookup_official_absent(table, pair_map):
    rng = random.Random(11)
    checked = 0
    while checked < 2000:
        a, b = rng.randrange(2**32), rng.randrange(2**32)
        if (a, b) in pair_map or lb.pack_key(a, b) == EMPTY_KEY:
            continue
        assert table.lookup(a, b) is None
        checked += 1


def test_lookup_pairs_matches_scalar(table, rules):
    rng = random.Random(12)
    sample = rng.sample(rules, 300)
    left = np.array(
        [r.left for r in sample] + [rng.randrange(2**32) for _ in range(300)],
        dtype=np.uint32,
    )
    right = np.array(
        [r.right for r in sample] + [rng.randrange(2**32) for _ in range(300)],
        dtype=np.uint32,
    )
    found, new_tokens, ranks = table.lookup_pairs(left, right)
    for i in range(len(left)):
        scalar = table.lookup(int(left[i]), int(right[i]))
        if scalar is None:
            assert not found[i]
        else:
            assert found[i]
            assert (int(new_tokens[i]), int(ranks[i])) == scalar


def test_lookup_pairs_empty(table):
    empty = np.empty(0, dtype=np.uint32)
    found, new_tokens, ranks = table.lookup_pairs(empty, empty)
    assert len(found) == len(new_tokens) == len(ranks) == 0


def test_lookup_keys_into_reuses_scratch(tiny):
    scratch = ProbeScratch(4)
    keys = np.array([lb.pack_key(5, 9), lb.pack_key(0, 0)], dtype=np.uint64)
    hit, vals = tiny.table.lookup_keys_into(keys, scratch)
    assert hit.tolist() == [True, False]
    assert lb.unpack_value(int(vals[0])) == (100, 0)
    # Second call overwrites the same buffers.
    keys2 = np.array([lb.pack_key(13, 21)], dtype=np.uint64)
    hit2, vals2 = tiny.table.lookup_keys_into(keys2, scratch)
    assert hit2.tolist() == [True]
    assert lb.unpack_value(int(vals2[0])) == (103, 2)


def test_build_deterministic(tiny):
    t1 = lb.build_table(tiny.rules)
    t2 = lb.build_table(tiny.rules)
    assert np.array_equal(t1.keys, t2.keys)
    assert np.array_equal(t1.values, t2.values)


@settings(max_examples=50)
@given(st.lists(st.tuples(token_ids, token_ids), min_size=1, max_size=40, unique=True))
def test_build_then_lookup_roundtrip(pairs):
    rules = [
        lb.MergeRule(a, b, rank, rank + 1_000_000)
        for rank, (a, b) in enumerate(pairs)
        if lb.pack_key(a, b) != EMPTY_KEY
    ]
    table = lb.build_table(rules)
    for r in rules:
        assert table.lookup(r.left, r.right) == (r.new_token, r.rank)
