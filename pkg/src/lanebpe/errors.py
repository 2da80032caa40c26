"""Exception types raised across the package.

Everything derives from TokenizerError so callers can catch one base class
at the CLI boundary and map it to an exit code.
"""


class TokenizerError(Exception):
    """Base class for all errors raised by this package."""


class MalformedVocab(TokenizerError):
    """Vocabulary file is not a JSON object of symbol -> integer id."""


class MissingSymbol(TokenizerError):
    """A single-byte symbol has no id in the vocabulary."""


class UnknownTokenId(TokenizerError):
    """Token id has no symbol, or its symbol maps to no byte sequence."""


class MalformedLine(TokenizerError):
    """A merges line does not contain exactly two space-separated symbols."""


class UnknownSymbol(TokenizerError):
    """A merges line names a symbol absent from the vocabulary."""


class DuplicatePair(TokenizerError):
    """The same (left, right) pair appears in two merge rules."""


class ReservedKey(TokenizerError):
    """Pair packs to the key value reserved for empty table slots."""


class OutOfRange(TokenizerError):
    """Merge position does not address an adjacent pair in the sequence."""


class SequenceTooLong(TokenizerError):
    """Input exceeds the engine's configured maximum sequence length."""


class InvalidBudget(TokenizerError):
    """Chunk budget too small to hold a mergeable pair."""


class BatchError(TokenizerError):
    """Failure while processing one input of a batch; records which one."""

    def __init__(self, input_index: int, message: str):
        super().__init__(f"input {input_index}: {message}")
        self.input_index = input_index


class CorpusTooSmall(TokenizerError):
    """Benchmark corpus cannot supply a window of the requested length."""


class EmptyRecords(TokenizerError):
    """Report requested over zero benchmark records."""


class MalformedGoldenFile(TokenizerError):
    """Golden token file is neither one id per line nor a JSON array of ids."""
