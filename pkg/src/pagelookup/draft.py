"""Candidate generation for assisted decoding.

Three lookup strategies propose draft token runs by matching the tail of
the generated text back into a source sequence:

* prompt lookup   -- source is the prompt (useful when outputs quote it);
* page lookup     -- source is all page text flattened in reading order;
* copy lookup     -- source is an ordered pool of merged copyable spans,
  searched span by span, with a "topping" rotation that moves the span
  that last produced accepted tokens (and its successors) to the front so
  the search order tracks conversion progress down the page.

Matching takes the last n generated tokens (longest n first), finds the
leftmost occurrence in the source that still has at least one following
token, and copies up to K following tokens as candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cti import SpanLabeling
from .docmodel import Label, Page


@dataclass(frozen=True)
class DraftConfig:
    """Lookup window and candidate-run sizing.

    max_ngram: longest generated-suffix length tried for a match.
    min_ngram: shortest suffix tried before giving up.
    num_candidates: cap K on copied continuation tokens per proposal.
    """

    max_ngram: int = 3
    min_ngram: int = 1
    num_candidates: int = 10

    def __post_init__(self):
        if self.min_ngram < 1:
            raise ValueError("min_ngram must be >= 1")
        if self.max_ngram < self.min_ngram:
            raise ValueError("min_ngram must not exceed max_ngram")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")


@dataclass
class MatchResult:
    """A located n-gram match and the candidate tokens copied after it.

    match_start is the token offset of the matched n-gram within the flat
    source (prompt/page lookup) or within the matched pooled span (copy
    lookup, which also sets pool_index).
    """

    match_start: int
    ngram_len: int
    candidates: list[int]
    pool_index: int | None = None


@dataclass
class PooledSpan:
    """One merged run of copyable spans, tokenized as a single string."""

    pool_index: int
    source_span_ids: list[int]
    tokens: list[int]


@dataclass
class SpanPool:
    """Ordered candidate store for copy lookup; list order is search order.

    pool_index values stay attached to their spans across rotations, so
    they always form a permutation of 0..len-1.
    """

    spans: list[PooledSpan] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.spans)


def find_ngram_match(query: list[int], source: list[int], config: DraftConfig) -> MatchResult | None:
    """Match the query's trailing n-gram inside source, longest n first.

    For each n from min(max_ngram, len(query)) down to min_ngram, the last
    n query tokens are scanned for left-to-right; the first position p with
    source[p:p+n] equal to the suffix and at least one token following
    (p + n < len(source)) wins. Candidates are the up-to-K tokens after the
    match. Returns None when no n yields a match (including the degenerate
    empty/short query).
    """
    upper = min(config.max_ngram, len(query))
    if upper < config.min_ngram or len(source) < 2:
        return None
    packed = _pack(source)
    for n in range(upper, config.min_ngram - 1, -1):
        suffix = query[len(query) - n:]
        if packed is not None:
            pos = _find_packed(packed, suffix, len(source), n)
        else:
            pos = _find_scan(source, suffix, n)
        if pos is not None:
            start = pos + n
            return MatchResult(
                match_start=pos,
                ngram_len=n,
                candidates=source[start:start + config.num_candidates],
            )
    return None


def _pack(tokens: list[int]) -> str | None:
    # One char per id turns the position scan into C-level str.find.
    try:
        return "".join(map(chr, tokens))
    except (ValueError, TypeError, OverflowError):
        return None


def _find_packed(packed: str, suffix: list[int], source_len: int, n: int) -> int | None:
    needle = _pack(suffix)
    if needle is None:
        return None
    pos = packed.find(needle)
    while pos != -1:
        if pos + n < source_len:
            return pos
        pos = packed.find(needle, pos + 1)
    return None


def _find_scan(source: list[int], suffix: list[int], n: int) -> int | None:
    # Fallback for ids that cannot be packed into a str.
    for pos in range(len(source) - n):
        if source[pos:pos + n] == suffix:
            return pos
    return None


def flat_page_tokens(page: Page, tokenizer) -> list[int]:
    """All span texts joined with single spaces in reading order, tokenized (no filtering)."""
    spans = sorted(page.spans, key=lambda s: s.order)
    return tokenizer.encode(" ".join(span.text for span in spans))


def build_span_pool(page: Page, labeling: SpanLabeling, tokenizer) -> SpanPool:
    """Merge adjacent KEEP spans into pooled spans, in reading order.

    DELETE spans act as separators and are excluded. Each merged run is
    joined with single spaces and retokenized as one string. An all-DELETE
    page yields an empty (valid) pool.
    """
    missing = [span.id for span in page.spans if span.id not in labeling]
    if missing:
        raise ValueError(f"labeling does not cover span ids {missing}")
    pool = SpanPool()
    run: list = []
    for span in sorted(page.spans, key=lambda s: s.order):
        if labeling[span.id] is Label.KEEP:
            run.append(span)
        elif run:
            _close_run(pool, run, tokenizer)
            run = []
    if run:
        _close_run(pool, run, tokenizer)
    return pool


def _close_run(pool: SpanPool, run: list, tokenizer) -> None:
    tokens = tokenizer.encode(" ".join(span.text for span in run))
    if tokens:
        pool.spans.append(
            PooledSpan(
                pool_index=len(pool.spans),
                source_span_ids=[span.id for span in run],
                tokens=tokens,
            )
        )


def propose_pld(generated: list[int], prompt_tokens: list[int], config: DraftConfig) -> MatchResult | None:
    """Prompt lookup: match the generated suffix inside the prompt."""
    return find_ngram_match(generated, prompt_tokens, config)


def propose_mpld(generated: list[int], page_tokens: list[int], config: DraftConfig) -> MatchResult | None:
    """Page lookup: match inside the flat page text, first position wins.

    The first-match rule is the documented weakness: an early span sharing
    the suffix shadows the true continuation further down the page.
    """
    return find_ngram_match(generated, page_tokens, config)


def propose_cld(generated: list[int], pool: SpanPool, config: DraftConfig) -> MatchResult | None:
    """Copy lookup: search pooled spans in current list order.

    The first span containing any match wins (longest n first within that
    span); candidates never cross the span's end.
    """
    for span in pool.spans:
        match = find_ngram_match(generated, span.tokens, config)
        if match is not None:
            return replace(match, pool_index=span.pool_index)
    return None


def top_pool(pool: SpanPool, accepted_pool_index: int) -> SpanPool:
    """Rotate the pool so the span that just produced accepted tokens leads.

    The active span and all its successors move to the front; the preceding
    spans wrap to the end. Cyclic order is preserved; topping the current
    head is the identity.
    """
    for position, span in enumerate(pool.spans):
        if span.pool_index == accepted_pool_index:
            return SpanPool(pool.spans[position:] + pool.spans[:position])
    raise ValueError(f"pool has no span with pool_index {accepted_pool_index}")


class PromptLookup:
    """Draft source over the prompt tokens (baseline)."""

    name = "pld"

    def __init__(self, prompt_tokens: list[int], config: DraftConfig):
        self.prompt_tokens = list(prompt_tokens)
        self.config = config

    def propose(self, generated: list[int]) -> MatchResult | None:
        return propose_pld(generated, self.prompt_tokens, self.config)

    def observe(self, match: MatchResult, accepted: int) -> None:
        pass


class PageLookup:
    """Draft source over the flat page text."""

    name = "mpld"

    def __init__(self, page_tokens: list[int], config: DraftConfig):
        self.page_tokens = list(page_tokens)
        self.config = config

    def propose(self, generated: list[int]) -> MatchResult | None:
        return propose_mpld(generated, self.page_tokens, self.config)

    def observe(self, match: MatchResult, accepted: int) -> None:
        pass


class CopyLookup:
    """Draft source over the copyable span pool, with optional topping.

    Owns the pool as session-local mutable state: after a verification that
    accepted at least one candidate token, the matched span is rotated to
    the front (unless topping is disabled for ablation).
    """

    name = "cld"

    def __init__(self, pool: SpanPool, config: DraftConfig, topping: bool = True):
        self.pool = pool
        self.config = config
        self.topping = topping

    def propose(self, generated: list[int]) -> MatchResult | None:
        return propose_cld(generated, self.pool, self.config)

    def observe(self, match: MatchResult, accepted: int) -> None:
        if self.topping and accepted >= 1 and match.pool_index is not None:
            self.pool = top_pool(self.pool, match.pool_index)
