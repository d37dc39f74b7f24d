"""The draft-and-verify decode loop with a lossless-output guarantee.

Each iteration asks the session's draft source for candidate tokens and
verifies them in one batched model call: candidates are accepted left to
right until the first token that disagrees with the model's own greedy
choice, and the greedy token at the first disagreement (or after a fully
accepted run) is emitted as the bonus token. With no proposal the loop
falls back to a plain greedy step. Because every emitted token is the
model's greedy choice at its position, the output is token-identical to
pure greedy decoding for any model, draft source, and configuration.

Speedup is accounted in forward passes: one verification call counts as a
single pass no matter how many candidates it checks, so

    tokens_emitted == forward_passes + candidate_tokens_accepted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol

from .cti import HeuristicConfig, classify_gold, classify_heuristic
from .docmodel import Label, Page
from .draft import (
    CopyLookup,
    DraftConfig,
    MatchResult,
    PageLookup,
    PromptLookup,
    build_span_pool,
    flat_page_tokens,
)
from .tokenizers import BOS, EOS

DEFAULT_INSTRUCTION = "Convert this page to Markdown. Return only the Markdown."

METHODS = ("scratch", "pld", "mpld", "cld")


class ModelInterface(Protocol):
    """Batched greedy-continuation contract; one call = one forward pass."""

    def greedy_continuations(self, prefix: list[int], candidates: list[int]) -> list[int]:
        ...


class DraftSource(Protocol):
    def propose(self, generated: list[int]) -> MatchResult | None:
        ...

    def observe(self, match: MatchResult, accepted: int) -> None:
        ...


@dataclass
class DecodeStats:
    forward_passes: int = 0
    tokens_emitted: int = 0
    candidate_tokens_accepted: int = 0
    proposals_made: int = 0
    wall_time: float = 0.0
    cti_time: float = 0.0

    @property
    def tokens_per_pass(self) -> float:
        return self.tokens_emitted / self.forward_passes if self.forward_passes else 0.0

    def counters(self) -> tuple[int, int, int, int]:
        """The deterministic counter tuple (everything except wall/cti time)."""
        return (self.forward_passes, self.tokens_emitted,
                self.candidate_tokens_accepted, self.proposals_made)


@dataclass
class VerificationOutcome:
    """Accepted candidate count m plus the m+1 emitted tokens (run + bonus)."""

    accepted_count: int
    emitted: list[int]


@dataclass
class DecodeSession:
    """Single-owner state for one assisted decode over one page.

    Strictly single-threaded: the draft source (notably the copy-lookup
    pool) is session-local mutable state. Distinct sessions may run in
    parallel as long as the model is shared read-only.
    """

    tokenizer: object
    model: ModelInterface
    draft: DraftSource | None
    config: DraftConfig
    prompt_tokens: list[int]
    method: str = "scratch"
    cti_time: float = 0.0
    generated: list[int] = field(default_factory=list)


def verify_candidates(model: ModelInterface, prefix: list[int], candidates: list[int]) -> VerificationOutcome:
    """Check candidates against the model's greedy choices in one forward pass."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    greedy = model.greedy_continuations(prefix, candidates)
    m = 0
    while m < len(candidates) and candidates[m] == greedy[m]:
        m += 1
    return VerificationOutcome(accepted_count=m, emitted=candidates[:m] + [greedy[m]])


def greedy_decode(model: ModelInterface, prompt: list[int], max_new_tokens: int) -> tuple[list[int], DecodeStats]:
    """Plain one-token-per-pass decoding; the baseline every method must equal."""
    if max_new_tokens < 1:
        raise ValueError("max_new_tokens must be >= 1")
    stats = DecodeStats()
    started = time.perf_counter()
    context = list(prompt)
    generated: list[int] = []
    while len(generated) < max_new_tokens:
        token = model.greedy_continuations(context, [])[0]
        generated.append(token)
        context.append(token)
        stats.forward_passes += 1
        stats.tokens_emitted += 1
        if token == EOS:
            break
    stats.wall_time = time.perf_counter() - started
    return generated, stats


def assisted_decode(session: DecodeSession, prompt: list[int], max_new_tokens: int) -> tuple[list[int], DecodeStats]:
    """Draft-and-verify loop; output is token-identical to greedy_decode.

    A final accepted run that would overshoot max_new_tokens is truncated
    to the cap, matching a greedy run under the same cap.
    """
    if max_new_tokens < 1:
        raise ValueError("max_new_tokens must be >= 1")
    stats = DecodeStats(cti_time=session.cti_time)
    started = time.perf_counter()
    context = list(prompt)
    generated: list[int] = []
    while len(generated) < max_new_tokens:
        proposal = session.draft.propose(generated) if session.draft is not None else None
        if proposal is None:
            emitted = [session.model.greedy_continuations(context, [])[0]]
            accepted = 0
        else:
            stats.proposals_made += 1
            outcome = verify_candidates(session.model, context, proposal.candidates)
            emitted = outcome.emitted
            accepted = outcome.accepted_count
        stats.forward_passes += 1

        kept = emitted[: max_new_tokens - len(generated)]
        generated.extend(kept)
        context.extend(kept)
        stats.tokens_emitted += len(kept)
        if proposal is not None:
            # Of the kept tokens, all but the pass's own bonus token came
            # from candidates; on truncation this keeps the stats ledger
            # identity intact.
            stats.candidate_tokens_accepted += len(kept) - 1
            session.draft.observe(proposal, accepted)
        if kept[-1] == EOS:
            break
    stats.wall_time = time.perf_counter() - started
    session.generated = generated
    return generated, stats


def resolve_classifier(classifier, heuristic_config: HeuristicConfig | None = None):
    """Map a classifier selector ("gold", "heuristic", or a callable) to a callable."""
    if callable(classifier):
        return classifier
    if classifier == "gold":
        return classify_gold
    if classifier == "heuristic":
        return lambda page: classify_heuristic(page, heuristic_config)
    raise ValueError(f"unknown classifier {classifier!r}")


def session_for_page(
    page: Page,
    *,
    tokenizer,
    model: ModelInterface,
    method: str = "cld",
    config: DraftConfig | None = None,
    prompt_text: str = DEFAULT_INSTRUCTION,
    classifier="gold",
    use_cti: bool = True,
    topping: bool = True,
    heuristic_config: HeuristicConfig | None = None,
) -> DecodeSession:
    """Assemble a decode session for one page.

    For copy lookup, the classifier runs here (timed into cti_time) unless
    use_cti is False, in which case every span counts as copyable -- the
    ablation that reduces copy lookup to flat page lookup.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    config = config or DraftConfig()
    prompt_tokens = [BOS] + tokenizer.encode(prompt_text)
    cti_time = 0.0
    draft: DraftSource | None
    if method == "scratch":
        draft = None
    elif method == "pld":
        draft = PromptLookup(prompt_tokens, config)
    elif method == "mpld":
        draft = PageLookup(flat_page_tokens(page, tokenizer), config)
    else:
        if use_cti:
            classify = resolve_classifier(classifier, heuristic_config)
            started = time.perf_counter()
            labeling = classify(page)
            cti_time = time.perf_counter() - started
        else:
            labeling = {span.id: Label.KEEP for span in page.spans}
        pool = build_span_pool(page, labeling, tokenizer)
        draft = CopyLookup(pool, config, topping=topping)
    return DecodeSession(
        tokenizer=tokenizer,
        model=model,
        draft=draft,
        config=config,
        prompt_tokens=prompt_tokens,
        method=method,
        cti_time=cti_time,
    )
