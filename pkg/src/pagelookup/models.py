"""Deterministic toy autoregressive models for exact acceptance checking.

All models satisfy the batched greedy-continuation contract: one call

    greedy_continuations(prefix, candidates) -> list of len(candidates)+1

returns, at index i, the model's greedy next token after the prefix
extended by the first i candidate tokens. One call counts as one forward
pass regardless of how many candidates it verifies, which is the whole
speedup currency of assisted decoding.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path
from typing import Iterable

from .tokenizers import BOS, EOS, RESERVED_IDS


class ReplayModel:
    """Position-indexed replay of a fixed reference sequence.

    The greedy token after any prefix is reference[len(prefix) - prompt_len];
    past the end it is EOS. Indexing by position (ignoring prefix content)
    keeps the oracle total even under hypothetical divergence, so a
    candidate is accepted at a position exactly when it equals the reference
    token there.
    """

    def __init__(self, reference: list[int], prompt_len: int = 0):
        self.reference = list(reference)
        self.prompt_len = prompt_len

    def greedy_continuations(self, prefix: list[int], candidates: list[int]) -> list[int]:
        base = len(prefix) - self.prompt_len
        out = []
        for i in range(len(candidates) + 1):
            idx = base + i
            out.append(self.reference[idx] if 0 <= idx < len(self.reference) else EOS)
        return out


class PerturbedReplay:
    """ReplayModel with deterministic substitutions at chosen positions.

    At each listed reference position the greedy token's id is incremented
    by 1 modulo the content vocabulary (reserved ids pass through), forcing
    candidate rejections there to exercise partial acceptance.
    """

    def __init__(self, reference: list[int], prompt_len: int = 0,
                 perturb_positions: Iterable[int] = (), vocab_size: int = 258):
        self._replay = ReplayModel(reference, prompt_len)
        self.perturb_positions = frozenset(perturb_positions)
        self.vocab_size = vocab_size

    def greedy_continuations(self, prefix: list[int], candidates: list[int]) -> list[int]:
        base = len(prefix) - self._replay.prompt_len
        out = self._replay.greedy_continuations(prefix, candidates)
        content = self.vocab_size - RESERVED_IDS
        for i, tok in enumerate(out):
            if base + i in self.perturb_positions and tok >= RESERVED_IDS:
                out[i] = RESERVED_IDS + (tok - RESERVED_IDS + 1) % content
        return out


class NGramLM:
    """Count-based n-gram language model with deterministic greedy decoding.

    Greedy next token = highest-count continuation of the last order-1
    tokens (left-padded with BOS), ties broken by smallest token id; an
    unseen context yields EOS. Counts persist as JSON.
    """

    def __init__(self, order: int = 3):
        if order < 2:
            raise ValueError("order must be >= 2")
        self.order = order
        self.counts: dict[tuple[int, ...], Counter] = {}

    def train(self, sequence: list[int]) -> "NGramLM":
        k = self.order - 1
        padded = [BOS] * k + list(sequence) + [EOS]
        for i in range(len(padded) - k):
            context = tuple(padded[i:i + k])
            self.counts.setdefault(context, Counter())[padded[i + k]] += 1
        return self

    def _greedy_next(self, context: list[int]) -> int:
        k = self.order - 1
        key = tuple(([BOS] * k + context)[-k:])
        options = self.counts.get(key)
        if not options:
            return EOS
        # Highest count wins; ties resolve to the smallest token id.
        return min(options, key=lambda tok: (-options[tok], tok))

    def greedy_continuations(self, prefix: list[int], candidates: list[int]) -> list[int]:
        seq = list(prefix)
        out = []
        for tok in [None] + list(candidates):
            if tok is not None:
                seq.append(tok)
            out.append(self._greedy_next(seq))
        return out

    def save(self, path: str | Path) -> None:
        data = {
            "order": self.order,
            "counts": {
                ",".join(map(str, ctx)): {str(tok): n for tok, n in sorted(counter.items())}
                for ctx, counter in sorted(self.counts.items())
            },
        }
        Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        model = cls(order=data["order"])
        for ctx_key, continuations in data["counts"].items():
            context = tuple(int(t) for t in ctx_key.split(",")) if ctx_key else ()
            model.counts[context] = Counter({int(t): n for t, n in continuations.items()})
        return model
