"""Fixed-offset chunking and the batch tokenization pipeline.

Sequences longer than the engine's limit are cut at fixed offsets into
chunks of at most chunk_budget tokens; chunks are tokenized independently
(merges never cross a boundary) and reassembled in input order. Shorter
sequences pass through whole.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .byte_codec import (
    ByteEncoder,
    Vocab,
    base_id_table,
    build_byte_encoder,
    decode_tokens,
)
from .engines import BlockConfig, PassCounters, run_block_engine, sequential_bpe
from .errors import BatchError, InvalidBudget, TokenizerError
from .merge_table import PackedPairTable, build_table, parse_merges

ENGINE_NAMES = ("sequential", "baseline", "optimized")


@dataclass(frozen=True)
class Chunk:
    """One engine-sized slice of an encoded input."""

    source_index: int
    chunk_index: int
    tokens: np.ndarray


def chunk_tokens(tokens: np.ndarray, chunk_budget: int, source_index: int = 0) -> list[Chunk]:
    """Cut a token sequence at fixed offsets into chunks <= chunk_budget.

    Offsets are 0, chunk_budget, 2*chunk_budget, ...; only the last chunk
    may be shorter. An empty sequence yields no chunks.
    """
    if chunk_budget < 2:
        raise InvalidBudget(f"chunk_budget must be >= 2, got {chunk_budget}")
    return [
        Chunk(source_index, k, tokens[off : off + chunk_budget])
        for k, off in enumerate(range(0, len(tokens), chunk_budget))
    ]


@dataclass
class BatchResult:
    """Outputs of tokenize_batch plus timing splits and work counters."""

    token_ids: list[np.ndarray]
    engine_time_ms: float
    encode_ms: float = 0.0
    assemble_ms: float = 0.0
    counters: PassCounters = field(default_factory=PassCounters)


class Tokenizer:
    """Byte encoder, vocabulary, merge table, and config bundled together.

    Construction validates that every single-byte symbol has an id, so
    encode never fails afterwards.
    """

    def __init__(
        self,
        vocab: Vocab,
        table: PackedPairTable,
        config: BlockConfig | None = None,
        encoder: ByteEncoder | None = None,
    ):
        self.encoder = encoder if encoder is not None else build_byte_encoder()
        self.vocab = vocab
        self.table = table
        self.config = config if config is not None else BlockConfig()
        self._base_ids = base_id_table(self.encoder, vocab)

    @classmethod
    def from_files(
        cls, vocab_path: str | Path, merges_path: str | Path, config: BlockConfig | None = None
    ) -> "Tokenizer":
        vocab = Vocab.from_file(vocab_path)
        rules = parse_merges(Path(merges_path).read_bytes(), vocab)
        return cls(vocab, build_table(rules), config)

    def encode(self, text: bytes) -> np.ndarray:
        """Byte string -> base token ids (one per byte, no merges)."""
        data = np.frombuffer(bytes(text), dtype=np.uint8)
        return self._base_ids[data]

    def decode(self, tokens) -> bytes:
        return decode_tokens(tokens, self.encoder, self.vocab)


def _as_bytes(text) -> bytes:
    if isinstance(text, str):
        return text.encode("utf-8")
    return bytes(text)


def tokenize_batch(
    texts,
    tokenizer: Tokenizer,
    variant: str = "optimized",
    workers: int | None = None,
) -> BatchResult:
    """Tokenize a batch of byte strings (str inputs are UTF-8 encoded).

    Pipeline: encode each input to base ids, cut inputs longer than
    max_seq_len into chunk_budget-sized chunks, run the chosen engine on
    every chunk (in a thread pool when workers > 1), and reassemble chunk
    outputs in input order. Outputs are identical for any worker count.
    engine_time_ms sums time spent inside engine calls only.
    """
    if variant not in ENGINE_NAMES:
        raise ValueError(f"unknown engine {variant!r}, expected one of {ENGINE_NAMES}")
    config = tokenizer.config
    if workers is None:
        workers = os.cpu_count() or 1

    t0 = time.perf_counter()
    encoded: list[np.ndarray] = []
    for i, text in enumerate(texts):
        try:
            encoded.append(tokenizer.encode(_as_bytes(text)))
        except (TokenizerError, TypeError, ValueError) as exc:
            raise BatchError(i, str(exc)) from exc
    encode_ms = (time.perf_counter() - t0) * 1000.0

    chunks: list[Chunk] = []
    for i, ids in enumerate(encoded):
        if len(ids) > config.max_seq_len:
            chunks.extend(chunk_tokens(ids, config.chunk_budget, source_index=i))
        else:
            chunks.append(Chunk(i, 0, ids))

    def run_one(chunk: Chunk) -> tuple[np.ndarray, PassCounters, float]:
        start = time.perf_counter()
        try:
            if variant == "sequential":
                out, counters = sequential_bpe(chunk.tokens, tokenizer.table)
            else:
                out, counters = run_block_engine(chunk.tokens, tokenizer.table, config, variant)
        except TokenizerError as exc:
            raise BatchError(chunk.source_index, str(exc)) from exc
        return out, counters, time.perf_counter() - start

    results: list[tuple[np.ndarray, PassCounters, float] | None] = [None] * len(chunks)
    if workers <= 1 or len(chunks) <= 1:
        for k, chunk in enumerate(chunks):
            results[k] = run_one(chunk)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for k, res in enumerate(pool.map(run_one, chunks)):
                results[k] = res

    t2 = time.perf_counter()
    engine_seconds = 0.0
    totals = PassCounters()
    per_input: list[list[np.ndarray]] = [[] for _ in texts]
    for chunk, res in zip(chunks, results):
        out, counters, seconds = res
        engine_seconds += seconds
        totals.merge_from(counters)
        per_input[chunk.source_index].append(out)
    token_ids = [
        np.concatenate(parts) if parts else np.empty(0, dtype=np.uint32)
        for parts in per_input
    ]
    assemble_ms = (time.perf_counter() - t2) * 1000.0

    return BatchResult(
        token_ids=token_ids,
        engine_time_ms=engine_seconds * 1000.0,
        encode_ms=encode_ms,
        assemble_ms=assemble_ms,
        counters=totals,
    )
