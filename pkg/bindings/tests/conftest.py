from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent.parent
GPT2_DIR = REPO_ROOT / "tests" / "data" / "gpt2"


@pytest.fixture(scope="session")
def gpt2_paths():
    return GPT2_DIR / "vocab.json", GPT2_DIR / "merges.txt"


@pytest.fixture(scope="session")
def fixture_docs():
    data = (TESTS_DIR / "data" / "batch_fixture.txt").read_bytes()
    docs = data.rstrip(b"\n").split(b"\n")
    assert len(docs) == 50
    return docs


@pytest.fixture(scope="session")
def handle(gpt2_paths):
    bindings = pytest.importorskip("lanebpe_bindings")
    return bindings.TokenizerHandle(*gpt2_paths)


@pytest.fixture(scope="session")
def core_tokenizer(gpt2_paths):
    import lanebpe

    return lanebpe.Tokenizer.from_files(*gpt2_paths)
