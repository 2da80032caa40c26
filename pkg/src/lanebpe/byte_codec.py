"""Byte-level symbol mapping and raw-byte <-> token-id conversion.

Merge vocabularies are defined over unicode strings, but the tokenizer
operates on raw bytes. The bridge is a fixed bijection from the 256 byte
values onto 256 "visible" codepoints: bytes that are already printable
keep their own codepoint, and the rest are relocated to 256 and up so
that no symbol is whitespace or a control character. Encoding a byte
string is then a pure per-byte table lookup, independent of position.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedVocab, MissingSymbol, UnknownTokenId

MAX_TOKEN_ID = 2**32 - 1

# Byte ranges that map to their own codepoint: the printable ASCII block
# and the printable latin-1 blocks around the soft hyphen (0xAD), which is
# excluded because some renderers treat it as invisible.
_PRINTABLE_RANGES = ((0x21, 0x7E), (0xA1, 0xAC), (0xAE, 0xFF))


@dataclass(frozen=True)
class ByteEncoder:
    """Bijection between byte values and single-character symbols."""

    byte_to_symbol: tuple[str, ...]
    symbol_to_byte: dict[str, int]


def build_byte_encoder() -> ByteEncoder:
    """Construct the fixed byte <-> symbol bijection.

    Printable bytes are identity-mapped. The remaining 68 byte values
    (controls, space, DEL, and a few latin-1 gaps) are assigned codepoints
    256, 257, ... in ascending byte order, so e.g. byte 0x00 becomes
    chr(256) and the mapping tops out at chr(323).
    """
    byte_to_symbol: list[str | None] = [None] * 256
    for lo, hi in _PRINTABLE_RANGES:
        for b in range(lo, hi + 1):
            byte_to_symbol[b] = chr(b)
    shift = 0
    for b in range(256):
        if byte_to_symbol[b] is None:
            byte_to_symbol[b] = chr(256 + shift)
            shift += 1
    symbols = tuple(byte_to_symbol)  # type: ignore[arg-type]
    return ByteEncoder(symbols, {s: b for b, s in enumerate(symbols)})


class Vocab:
    """Symbol -> token id mapping plus its inverse.

    Ids must be unique integers in [0, 2**32), the width assumed by the
    packed merge table.
    """

    __slots__ = ("symbol_to_id", "id_to_symbol")

    def __init__(self, symbol_to_id: dict[str, int]):
        ids_seen: dict[int, str] = {}
        for sym, tid in symbol_to_id.items():
            if not isinstance(sym, str) or isinstance(tid, bool) or not isinstance(tid, int):
                raise MalformedVocab(f"entry {sym!r}: {tid!r} is not a symbol -> int pair")
            if not 0 <= tid <= MAX_TOKEN_ID:
                raise MalformedVocab(f"id {tid} for {sym!r} outside [0, 2**32)")
            if tid in ids_seen:
                raise MalformedVocab(f"id {tid} assigned to both {ids_seen[tid]!r} and {sym!r}")
            ids_seen[tid] = sym
        self.symbol_to_id = dict(symbol_to_id)
        self.id_to_symbol = {tid: sym for sym, tid in self.symbol_to_id.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocab":
        try:
            mapping = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MalformedVocab(f"{path}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise MalformedVocab(f"{path}: top level is not an object")
        return cls(mapping)

    def __len__(self) -> int:
        return len(self.symbol_to_id)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbol_to_id


def base_id_table(encoder: ByteEncoder, vocab: Vocab) -> np.ndarray:
    """256-entry uint32 table taking a byte value to its base token id.

    Raises MissingSymbol if any single-byte symbol lacks a vocabulary id;
    a vocabulary that cannot represent every byte cannot tokenize
    arbitrary input.
    """
    table = np.empty(256, dtype=np.uint32)
    lookup = vocab.symbol_to_id
    for b, sym in enumerate(encoder.byte_to_symbol):
        tid = lookup.get(sym)
        if tid is None:
            raise MissingSymbol(f"byte 0x{b:02X} (symbol {sym!r}) has no vocabulary id")
        table[b] = tid
    return table


def encode_bytes(text: bytes, encoder: ByteEncoder, vocab: Vocab) -> np.ndarray:
    """Map a byte string to its base token ids, one id per byte."""
    table = base_id_table(encoder, vocab)
    data = np.frombuffer(bytes(text), dtype=np.uint8)
    return table[data]


def decode_tokens(tokens, encoder: ByteEncoder, vocab: Vocab) -> bytes:
    """Map token ids back to the exact byte string they encode.

    Works for merged tokens too: a merged symbol is the concatenation of
    its parts' symbols, so each character maps back to one byte.
    """
    id_to_symbol = vocab.id_to_symbol
    symbol_to_byte = encoder.symbol_to_byte
    cache: dict[int, bytes] = {}
    out = bytearray()
    for tok in tokens:
        tid = int(tok)
        chunk = cache.get(tid)
        if chunk is None:
            sym = id_to_symbol.get(tid)
            if sym is None:
                raise UnknownTokenId(f"id {tid} not in vocabulary")
            try:
                chunk = bytes(symbol_to_byte[ch] for ch in sym)
            except KeyError as exc:
                raise UnknownTokenId(
                    f"id {tid} symbol {sym!r} contains non-byte character {exc.args[0]!r}"
                ) from exc
            cache[tid] = chunk
        out += chunk
    return bytes(out)
