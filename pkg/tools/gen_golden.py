#!/usr/bin/env python3
"""Generate golden token files for the prose corpus.

Deliberately self-contained: parses the vocabulary and merges files itself
and applies merges with a plain dictionary loop, so the goldens come from
a code path sharing nothing with the package under test. Do not import
lanebpe here.

Usage: python3 tools/gen_golden.py [corpus] [vocab] [merges] [out_dir]
"""

import json
import sys
from pathlib import Path


def byte_symbol_map() -> dict[int, str]:
    """Printable bytes keep their codepoint; the rest get 256, 257, ..."""
    printable = (
        list(range(0x21, 0x7F)) + list(range(0xA1, 0xAD)) + list(range(0xAE, 0x100))
    )
    mapping = {b: chr(b) for b in printable}
    bump = 0
    for b in range(256):
        if b not in mapping:
            mapping[b] = chr(256 + bump)
            bump += 1
    return mapping


def load_ranks(merges_path: Path, vocab: dict[str, int]):
    pair_rank: dict[tuple[int, int], tuple[int, int]] = {}
    lines = merges_path.read_text(encoding="utf-8").splitlines()
    if lines and lines[0].startswith("#"):
        lines = lines[1:]
    for rank, line in enumerate(lines):
        left, right = line.split(" ")
        pair = (vocab[left], vocab[right])
        assert pair not in pair_rank, f"duplicate rule {line!r}"
        pair_rank[pair] = (rank, vocab[left + right])
    return pair_rank


def greedy_tokenize(data: bytes, base_ids: list[int], pair_rank) -> list[int]:
    ids = [base_ids[b] for b in data]
    get = pair_rank.get
    while len(ids) >= 2:
        best_rank = None
        best_pos = -1
        for i in range(len(ids) - 1):
            hit = get((ids[i], ids[i + 1]))
            if hit is not None and (best_rank is None or hit[0] < best_rank):
                best_rank = hit[0]
                best_pos = i
        if best_rank is None:
            break
        ids[best_pos : best_pos + 2] = [pair_rank[(ids[best_pos], ids[best_pos + 1])][1]]
    return ids


def main() -> None:
    args = sys.argv[1:]
    corpus = Path(args[0]) if len(args) > 0 else Path("tests/data/prose_corpus.txt")
    vocab_path = Path(args[1]) if len(args) > 1 else Path("tests/data/gpt2/vocab.json")
    merges_path = Path(args[2]) if len(args) > 2 else Path("tests/data/gpt2/merges.txt")
    out_dir = Path(args[3]) if len(args) > 3 else Path("tests/data/golden")

    vocab = json.loads(vocab_path.read_text(encoding="utf-8"))
    symbols = byte_symbol_map()
    base_ids = [vocab[symbols[b]] for b in range(256)]
    pair_rank = load_ranks(merges_path, vocab)

    out_dir.mkdir(parents=True, exist_ok=True)
    samples = corpus.read_bytes().rstrip(b"\n").split(b"\n")
    for i, sample in enumerate(samples):
        ids = greedy_tokenize(sample, base_ids, pair_rank)
        path = out_dir / f"sample_{i:03d}.tokens"
        path.write_text("\n".join(str(t) for t in ids) + "\n", encoding="ascii")
    print(f"wrote {len(samples)} golden files to {out_dir}")


if __name__ == "__main__":
    main()
