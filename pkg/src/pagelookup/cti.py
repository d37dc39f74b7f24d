"""Copyable-text identification: label each page span KEEP or DELETE.

Copyable text is page text expected to appear near-verbatim in the Markdown
output (paragraph prose). Formulas, headers, footers, and page numbers are
not copyable. Copyability is treated as homogeneous per span, so the
classifier contract is simply any callable ``Page -> {span_id: Label}``
covering every span. Two built-ins:

* ``classify_heuristic`` -- layout rules (margin bands, page-number
  patterns, math-symbol density). A stand-in for a learned token
  classifier; the contract is the seam where one would plug in.
* ``classify_gold`` -- passthrough of annotated gold labels.

``vote_span_label`` aggregates token-level predictions to a span label by
majority vote, which is how a token classifier's output becomes span labels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .docmodel import Label, Page

SpanLabeling = dict[int, Label]
ClassifierContract = Callable[[Page], SpanLabeling]

PAGE_NUMBER_RE = re.compile(r"^\s*(?:\d+|page\s+\d+(?:\s+of\s+\d+)?)\s*$", re.IGNORECASE)

# Symbols that mark math-like spans. Digits count only when the span also
# contains at least one operator (digits mixed with operators), so plain
# prose mentioning years or counts is not penalized.
_MATH_OPERATORS = set("\\^_=+\u2211\u222b")


def _is_greek(ch: str) -> bool:
    return 0x0370 <= ord(ch) <= 0x03FF


def math_symbol_density(text: str) -> float:
    """Fraction of characters that look like math notation."""
    if not text:
        return 0.0
    has_operator = any(ch in _MATH_OPERATORS or _is_greek(ch) for ch in text)
    count = 0
    for ch in text:
        if ch in _MATH_OPERATORS or _is_greek(ch):
            count += 1
        elif ch.isdigit() and has_operator:
            count += 1
    return count / len(text)


@dataclass(frozen=True)
class HeuristicConfig:
    """Tunables for the layout heuristic; defaults match the synthetic corpus noise."""

    margin_band: float = 0.08
    header_max_chars: int = 80
    math_density_threshold: float = 0.25

    @classmethod
    def from_dict(cls, raw: Mapping) -> "HeuristicConfig":
        allowed = {"margin_band", "header_max_chars", "math_density_threshold"}
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown heuristic config keys {sorted(unknown)}")
        return cls(**raw)


def classify_heuristic(page: Page, config: HeuristicConfig | None = None) -> SpanLabeling:
    """Label spans by ordered layout rules.

    1. DELETE page-number text (pure integer or "Page N [of M]") sitting in
       the top or bottom margin band.
    2. DELETE short text in a margin band (headers/footers).
    3. DELETE spans whose math-symbol density exceeds the threshold.
    4. KEEP everything else.
    """
    config = config or HeuristicConfig()
    band = config.margin_band * page.height
    labeling: SpanLabeling = {}
    for span in page.spans:
        cy = span.bbox.center_y
        in_margin = cy <= band or cy >= page.height - band
        if in_margin and PAGE_NUMBER_RE.match(span.text):
            labeling[span.id] = Label.DELETE
        elif in_margin and len(span.text) < config.header_max_chars:
            labeling[span.id] = Label.DELETE
        elif math_symbol_density(span.text) > config.math_density_threshold:
            labeling[span.id] = Label.DELETE
        else:
            labeling[span.id] = Label.KEEP
    return labeling


def classify_gold(page: Page) -> SpanLabeling:
    """Pass through annotated gold labels; every span must carry one."""
    labeling: SpanLabeling = {}
    for span in page.spans:
        if span.gold_label is None:
            raise ValueError(f"span {span.id} has no gold label")
        labeling[span.id] = span.gold_label
    return labeling


def vote_span_label(token_labels: Sequence[Label]) -> Label:
    """Majority vote over token labels; ties resolve to KEEP.

    A wrong KEEP only wastes one verification pass (output is lossless
    either way); a wrong DELETE forfeits speedup on copyable text.
    """
    if not token_labels:
        raise ValueError("cannot vote over an empty token label list")
    keeps = sum(1 for label in token_labels if label is Label.KEEP)
    return Label.KEEP if keeps * 2 >= len(token_labels) else Label.DELETE


@dataclass(frozen=True)
class TokenPrediction:
    """One token-level classifier prediction within a span."""

    span_id: int
    token_index: int
    label: Label


@dataclass(frozen=True)
class F1Score:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _binary_f1(pairs: Iterable[tuple[Label, Label]]) -> F1Score:
    tp = fp = fn = 0
    for pred, gold in pairs:
        if pred is Label.KEEP and gold is Label.KEEP:
            tp += 1
        elif pred is Label.KEEP:
            fp += 1
        elif gold is Label.KEEP:
            fn += 1
    if tp == 0 and fp == 0 and fn == 0:
        # No positives predicted and none gold: vacuously perfect.
        return F1Score(1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return F1Score(precision, recall, f1)


def span_label_f1(pred: Mapping[int, Label], gold: Mapping[int, Label]) -> F1Score:
    """Span-level precision/recall/F1 with KEEP as the positive class."""
    if set(pred) != set(gold):
        raise ValueError("prediction and gold labelings cover different span ids")
    return _binary_f1((pred[i], gold[i]) for i in pred)


def token_label_f1(pred: Iterable[TokenPrediction], gold: Iterable[TokenPrediction]) -> F1Score:
    """Token-level precision/recall/F1 with KEEP as the positive class."""
    pred_map = {(p.span_id, p.token_index): p.label for p in pred}
    gold_map = {(g.span_id, g.token_index): g.label for g in gold}
    if set(pred_map) != set(gold_map):
        raise ValueError("prediction and gold token sets cover different (span, token) ids")
    return _binary_f1((pred_map[k], gold_map[k]) for k in pred_map)
