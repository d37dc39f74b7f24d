"""Deterministic, invertible text <-> token-id mappings.

Ids 0 and 1 are reserved (BOS, EOS); content ids start at 2. Every model,
draft source, and decode session in one run must share a single tokenizer
instance so that page text, prompts, and references live in the same id
space.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

BOS = 0
EOS = 1
RESERVED_IDS = 2


class ByteTokenizer:
    """UTF-8 byte tokenizer: byte value b maps to id b + 2 (vocab size 258).

    surrogateescape is used in both directions, so decode(encode(t)) == t
    for every string and encode(decode(s)) == s for every BOS/EOS-free id
    sequence, including ones that are not valid UTF-8.
    """

    vocab_size = 256 + RESERVED_IDS

    def encode(self, text: str) -> list[int]:
        return [b + RESERVED_IDS for b in text.encode("utf-8", "surrogateescape")]

    def decode(self, tokens: Iterable[int]) -> str:
        data = bytearray()
        for pos, tok in enumerate(tokens):
            if tok in (BOS, EOS):
                continue
            if not RESERVED_IDS <= tok < self.vocab_size:
                raise ValueError(f"unknown token id {tok} at position {pos}")
            data.append(tok - RESERVED_IDS)
        return bytes(data).decode("utf-8", "surrogateescape")


class WhitespaceTokenizer:
    """Word tokenizer over single-space segments with a fixed vocabulary.

    encode splits on single spaces (str.split(" ")), so segments may carry
    any other characters, and decode joins with single spaces; the pair is
    an exact inverse on any text whose segments are all in the vocabulary.
    Word-level ids make n-gram matches reach whole phrases, which is what
    the readable demos and the benchmark corpus use.

    The vocabulary persists as a JSON array of strings; index + 2 = id.
    """

    def __init__(self, vocab: list[str]):
        if len(set(vocab)) != len(vocab):
            raise ValueError("vocabulary contains duplicate segments")
        self.vocab = list(vocab)
        self._ids = {seg: i + RESERVED_IDS for i, seg in enumerate(self.vocab)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab) + RESERVED_IDS

    @classmethod
    def build(cls, texts: Iterable[str]) -> "WhitespaceTokenizer":
        """Collect every segment occurring in the given texts (sorted for determinism)."""
        segments = {seg for text in texts for seg in text.split(" ")}
        return cls(sorted(segments))

    def encode(self, text: str) -> list[int]:
        if text == "":
            return []
        out = []
        for pos, seg in enumerate(text.split(" ")):
            tok = self._ids.get(seg)
            if tok is None:
                raise ValueError(f"segment {seg!r} at position {pos} is not in the vocabulary")
            out.append(tok)
        return out

    def decode(self, tokens: Iterable[int]) -> str:
        segments = []
        for pos, tok in enumerate(tokens):
            if tok in (BOS, EOS):
                continue
            if not RESERVED_IDS <= tok < self.vocab_size:
                raise ValueError(f"unknown token id {tok} at position {pos}")
            segments.append(self.vocab[tok - RESERVED_IDS])
        return " ".join(segments)

    def save_vocab(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.vocab, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load_vocab(cls, path: str | Path) -> "WhitespaceTokenizer":
        vocab = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(vocab, list) or not all(isinstance(v, str) for v in vocab):
            raise ValueError(f"{path}: vocabulary must be a JSON array of strings")
        return cls(vocab)
