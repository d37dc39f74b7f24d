"""Conversion-quality scores: normalized edit distance, BLEU-4, bag-of-words F1.

All scores live in [0, 1]. Tokenization is plain whitespace splitting and
BLEU uses add-one smoothing for orders with zero matches, so values are
comparable within this artifact only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np


def levenshtein(a: str, b: str) -> int:
    """Edit distance over Unicode scalar values (insert/delete/substitute, cost 1)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    b_codes = np.fromiter((ord(c) for c in b), dtype=np.int64, count=len(b))
    idx = np.arange(len(b) + 1, dtype=np.int64)
    prev = idx.copy()
    cur = np.empty(len(b) + 1, dtype=np.int64)
    for i, ch in enumerate(a, start=1):
        cur[0] = i
        substitute = prev[:-1] + (b_codes != ord(ch))
        cur[1:] = np.minimum(prev[1:] + 1, substitute)
        # Left-to-right deletion relaxation: cur[j] = min over j' <= j of
        # cur[j'] + (j - j'), done with a running minimum.
        cur = np.minimum(cur, np.minimum.accumulate(cur - idx) + idx)
        prev, cur = cur, prev
    return int(prev[-1])


def edit_distance_norm(pred: str, ref: str) -> float:
    """Levenshtein distance divided by the longer length; two empty strings score 0."""
    longest = max(len(pred), len(ref))
    if longest == 0:
        return 0.0
    return levenshtein(pred, ref) / longest


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(pred: str, ref: str) -> float:
    """BLEU-4: uniform 1/4 weights, whitespace tokens, brevity penalty,
    add-one smoothing for orders with zero matches. Empty prediction scores 0."""
    pred_tokens = pred.split()
    ref_tokens = ref.split()
    if not pred_tokens:
        return 0.0
    log_precision = 0.0
    for n in range(1, 5):
        pred_ngrams = _ngram_counts(pred_tokens, n)
        ref_ngrams = _ngram_counts(ref_tokens, n)
        total = max(len(pred_tokens) - n + 1, 0)
        matched = sum(min(count, ref_ngrams[gram]) for gram, count in pred_ngrams.items())
        if matched == 0:
            precision = (matched + 1) / (total + 1)
        else:
            precision = matched / total
        log_precision += 0.25 * math.log(precision)
    if len(pred_tokens) >= len(ref_tokens):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(ref_tokens) / len(pred_tokens))
    return brevity * math.exp(log_precision)


def token_f1(pred: str, ref: str) -> float:
    """Bag-of-words (multiset) F1 over whitespace tokens; both empty scores 1."""
    pred_counts = Counter(pred.split())
    ref_counts = Counter(ref.split())
    if not pred_counts and not ref_counts:
        return 1.0
    overlap = sum((pred_counts & ref_counts).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred_counts.values())
    recall = overlap / sum(ref_counts.values())
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class QualityScores:
    edit_dist: float
    bleu: float
    f1: float

    def as_dict(self) -> dict:
        return {"edit_dist": self.edit_dist, "bleu": self.bleu, "f1": self.f1}


def score_pair(pred: str, ref: str) -> QualityScores:
    return QualityScores(
        edit_dist=edit_distance_norm(pred, ref),
        bleu=bleu(pred, ref),
        f1=token_f1(pred, ref),
    )
