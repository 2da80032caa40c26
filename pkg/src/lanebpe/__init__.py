"""Lane-parallel byte-level BPE tokenizer with interchangeable engines.

Public surface: byte codec (byte <-> symbol <-> id), packed merge table,
three token-identical merge engines, fixed-offset chunking with a batch
pipeline, and benchmarking/reporting helpers.
"""

from . import errors
from .bench import (
    BenchRecord,
    GoldenReport,
    ProfileReport,
    SweepSpec,
    compare_golden,
    emit_report,
    load_golden_file,
    make_windows,
    profile_run,
    run_sweep,
)
from .byte_codec import (
    ByteEncoder,
    Vocab,
    build_byte_encoder,
    decode_tokens,
    encode_bytes,
)
from .chunker import (
    ENGINE_NAMES,
    BatchResult,
    Chunk,
    Tokenizer,
    chunk_tokens,
    tokenize_batch,
)
from .engines import (
    BlockConfig,
    PairCandidate,
    PassCounters,
    compact_double_buffer,
    compact_scan,
    eval_pairs,
    inject_compaction_fault,
    run_block_engine,
    sequential_bpe,
    token_seq,
)
from .merge_table import (
    MergeRule,
    PackedPairTable,
    build_table,
    pack_key,
    pack_value,
    parse_merges,
    unpack_value,
)

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "BenchRecord",
    "BlockConfig",
    "ByteEncoder",
    "Chunk",
    "ENGINE_NAMES",
    "GoldenReport",
    "MergeRule",
    "PackedPairTable",
    "PairCandidate",
    "PassCounters",
    "ProfileReport",
    "SweepSpec",
    "Tokenizer",
    "Vocab",
    "build_byte_encoder",
    "build_table",
    "chunk_tokens",
    "compact_double_buffer",
    "compact_scan",
    "compare_golden",
    "decode_tokens",
    "emit_report",
    "encode_bytes",
    "errors",
    "eval_pairs",
    "inject_compaction_fault",
    "load_golden_file",
    "make_windows",
    "pack_key",
    "pack_value",
    "parse_merges",
    "profile_run",
    "run_block_engine",
    "run_sweep",
    "sequential_bpe",
    "token_seq",
    "tokenize_batch",
    "unpack_value",
    "__version__",
]
