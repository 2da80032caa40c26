"""Serving-facing bindings for the lane-parallel BPE tokenizer.

The handle owns everything expensive: vocabulary, merge table, and engine
configuration are built once at construction and reused for every call.
tokenize_batch is a thin delegation to the core batch pipeline; no
tokenization logic lives in this package.
"""

from __future__ import annotations

import lanebpe
from lanebpe import ENGINE_NAMES, BlockConfig, Tokenizer
from lanebpe import tokenize_batch as _tokenize_batch

__version__ = lanebpe.__version__

__all__ = ["TokenizerHandle", "__version__"]


class TokenizerHandle:
    """Reusable tokenizer handle for batch serving.

    engine picks the merge engine (sequential, baseline, or optimized);
    lane_count, max_seq_len, and chunk_budget shape the block engines and
    the long-input chunker; workers caps the batch thread pool (None: one
    per CPU core). All state is read-only after construction, so one
    handle is safe for concurrent tokenize_batch calls.
    """

    __slots__ = ("_tokenizer", "_engine", "_workers")

    def __init__(
        self,
        vocab_path,
        merges_path,
        engine: str = "optimized",
        *,
        lane_count: int = 256,
        max_seq_len: int = 8192,
        chunk_budget: int | None = None,
        workers: int | None = None,
    ):
        if engine not in ENGINE_NAMES:
            raise ValueError(f"unknown engine {engine!r}, expected one of {ENGINE_NAMES}")
        config = BlockConfig(
            lane_count=lane_count, max_seq_len=max_seq_len, chunk_budget=chunk_budget
        )
        self._tokenizer = Tokenizer.from_files(vocab_path, merges_path, config)
        self._engine = engine
        self._workers = workers

    def tokenize_batch(self, texts) -> tuple[list[list[int]], float]:
        """Tokenize a batch of str (encoded as UTF-8) or bytes documents.

        Returns per-document token id lists in input order and the summed
        engine wall time in milliseconds. A failing document raises
        lanebpe.errors.BatchError carrying that input's index.
        """
        result = _tokenize_batch(
            texts, self._tokenizer, self._engine, workers=self._workers
        )
        return [ids.tolist() for ids in result.token_ids], result.engine_time_ms
