import sys
from pathlib import Path
from types import SimpleNamespace

import pytest

import lanebpe as lb

sys.path.insert(0, str(Path(__file__).parent))  # makes `import reference` work

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def gpt2_vocab_path() -> Path:
    return DATA / "gpt2" / "vocab.json"


@pytest.fixture(scope="session")
def gpt2_merges_path() -> Path:
    return DATA / "gpt2" / "merges.txt"


@pytest.fixture(scope="session")
def encoder():
    return lb.build_byte_encoder()


@pytest.fixture(scope="session")
def vocab(gpt2_vocab_path):
    return lb.Vocab.from_file(gpt2_vocab_path)


@pytest.fixture(scope="session")
def rules(vocab, gpt2_merges_path):
    return lb.parse_merges(gpt2_merges_path.read_bytes(), vocab)


@pytest.fixture(scope="session")
def table(rules):
    return lb.build_table(rules)


@pytest.fixture(scope="session")
def pair_map(rules):
    return {(r.left, r.right): (r.rank, r.new_token) for r in rules}


@pytest.fixture(scope="session")
def tokenizer(vocab, table):
    return lb.Tokenizer(vocab, table)


@pytest.fixture(scope="session")
def corpus_bytes() -> bytes:
    return (DATA / "prose_corpus.txt").read_bytes()


@pytest.fixture(scope="session")
def corpus_samples(corpus_bytes) -> list[bytes]:
    return corpus_bytes.rstrip(b"\n").split(b"\n")


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return DATA / "golden"


@pytest.fixture(scope="session")
def tiny():
    """Small synthetic vocabulary/rules with non-contiguous ids.

    Merge chain: a+b -> ab (rank 0), ab+c -> abc (1), c+d -> cd (2),
    e+f -> ef (3), b+c -> bc (4).
    """
    symbols = {
        "a": 5, "b": 9, "c": 13, "d": 21, "e": 34, "f": 55,
        "ab": 100, "abc": 101, "cd": 103, "ef": 105, "bc": 107,
    }
    vocab = lb.Vocab(symbols)
    merges_text = "a b\nab c\nc d\ne f\nb c\n"
    rules = lb.parse_merges(merges_text, vocab)
    table = lb.build_table(rules)

    def encode(text: str) -> list[int]:
        return [symbols[ch] for ch in text]

    return SimpleNamespace(
        vocab=vocab,
        symbols=symbols,
        merges_text=merges_text,
        rules=rules,
        table=table,
        encode=encode,
        pair_map={(r.left, r.right): (r.rank, r.new_token) for r in rules},
    )
