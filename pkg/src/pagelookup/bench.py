"""Synthetic corpus generation and the corpus-level benchmark harness.

The generator emits labeled pages whose reference Markdown interleaves
verbatim copies of the copyable span text with model-only pseudo-LaTeX
segments (whose page-side counterparts are DELETE math spans), plus
header/page-number noise and optional decoy spans that share the leading
n-grams of later copyable text while preceding it in reading order. Decoys
instantiate the first-match weakness of flat page lookup deterministically;
a small word bank makes cross-paragraph n-gram repeats common enough to
show it statistically as well.

The harness decodes every page with every requested method, asserts that
each assisted output is token-identical to the greedy baseline (aborting
loudly otherwise), and aggregates per-method forward-pass and wall-clock
speedups. Forward-pass ratio is the headline number; toy-model wall time
does not model GPU latency.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .docmodel import BBox, Corpus, Label, Page, PageSchemaError, Span, load_corpus, save_page
from .draft import DraftConfig
from .engine import (
    DEFAULT_INSTRUCTION,
    DecodeStats,
    assisted_decode,
    greedy_decode,
    session_for_page,
)
from .models import NGramLM, PerturbedReplay, ReplayModel
from .tokenizers import BOS, ByteTokenizer, WhitespaceTokenizer

# Pronounceable synthetic words, drawn without replacement per page so
# n-gram matches are unambiguous: the page and its reference overlap almost
# token for token, and only decoy spans shadow a later continuation.
_SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"]
WORD_BANK = [a + b for a in _SYLLABLES for b in _SYLLABLES]

GREEK = ["\\alpha", "\\beta", "\\gamma", "\\delta", "\\lambda", "\\mu", "\\sigma", "\\phi"]

HEADERS = ["Synthetic Benchmark Proceedings", "Journal of Generated Pages"]

PAGE_WIDTH = 612.0
PAGE_HEIGHT = 792.0
LINE_HEIGHT = 14.0
BODY_TOP = 90.0
MARGIN_X0, MARGIN_X1 = 72.0, 540.0


@dataclass(frozen=True)
class GenSpec:
    """Knobs for the synthetic corpus; identical seeds give identical bytes."""

    pages: int
    copyable: float = 0.8
    decoys: int = 0
    seed: int = 0
    page_numbers: bool = True
    headers: bool = True
    math: bool = True
    body_blocks: int = 8
    line_words: int = 9
    lines_per_paragraph: tuple[int, int] = (2, 4)

    def __post_init__(self):
        if self.pages < 1:
            raise ValueError("pages must be >= 1")
        if not 0.0 <= self.copyable <= 1.0:
            raise ValueError("copyable fraction must be in [0, 1]")
        if self.decoys < 0:
            raise ValueError("decoys must be >= 0")
        if self.body_blocks < 1:
            raise ValueError("body_blocks must be >= 1")


def _word_stream(rng: random.Random):
    """Yield page-unique words: a seeded shuffle of the bank, suffixed on overflow."""
    bank = WORD_BANK.copy()
    rng.shuffle(bank)
    round_no = 0
    while True:
        suffix = "" if round_no == 0 else str(round_no)
        for word in bank:
            yield word + suffix
        round_no += 1


def _formula_pair(rng: random.Random) -> tuple[str, str]:
    """(page-side garbled span text, reference-side compact segment)."""
    a, b, c = (rng.choice(GREEK) for _ in range(3))
    d1, d2, d3 = (rng.randrange(2, 9) for _ in range(3))
    span_text = f"{a}_{d1}^{d2} + {b}_{d3} = {c}^{d1}"
    reference = f"$${a}_{{{d1}}}^{{{d2}}}+{b}_{{{d3}}}={c}^{{{d1}}}$$"
    return span_text, reference


def _formula_block(rng: random.Random) -> tuple[list[str], str]:
    span_text, ref_part = _formula_pair(rng)
    return [span_text], ref_part


def build_page(spec: GenSpec, index: int) -> Page:
    """Deterministically build page number `index` of the corpus."""
    rng = random.Random(f"{spec.seed}:{index}")
    words = _word_stream(rng)

    n_formula = round((1.0 - spec.copyable) * spec.body_blocks) if spec.math else 0
    n_para = spec.body_blocks - n_formula
    kinds = ["para"] * n_para + ["formula"] * n_formula
    rng.shuffle(kinds)

    blocks: list[tuple[str, list[str], str]] = []  # (kind, span texts, reference part)
    for kind in kinds:
        if kind == "para":
            lines = [
                " ".join(next(words) for _ in range(spec.line_words))
                for _ in range(rng.randint(*spec.lines_per_paragraph))
            ]
            blocks.append(("para", lines, " ".join(lines)))
        else:
            span_text, ref_part = _formula_pair(rng)
            blocks.append(("formula", [span_text], ref_part))

    # A decoy repeats the opening trigram and a mid-paragraph chunk of a
    # later paragraph, glued with fresh words, and never enters the
    # reference. Inserted earlier in reading order, it shadows flat-page
    # lookup (first match wins) at the target's entry and again mid-stream,
    # while the rotated span pool reaches the true paragraph first.
    para_positions = [i for i, b in enumerate(blocks) if b[0] == "para"]
    late_targets = [i for i in para_positions if i >= len(blocks) / 2]
    early_limit = max(1, len(blocks) // 2)
    targets = rng.sample(late_targets, min(spec.decoys, len(late_targets)))
    decoy_lines = []
    for target in targets:
        target_words = blocks[target][2].split(" ")
        pieces = target_words[:3] + [next(words) for _ in range(2)]
        # Staggered 5-word excerpts cover every lookup stride phase, and the
        # fresh glue words cap how many shadow candidates can be accepted.
        for offset in (8, 11, 14, 17):
            pieces += target_words[offset:offset + 5] + [next(words) for _ in range(2)]
        decoy_lines.append(" ".join(pieces))
    # Insertions land strictly before the (late-half) targets, which only
    # shift further right as decoys go in. A formula follows each decoy so
    # the decoy never merges into the same pooled span as its target.
    for decoy_line in decoy_lines:
        at = rng.randrange(0, early_limit)
        blocks.insert(at, ("formula", *_formula_block(rng)))
        blocks.insert(at, ("decoy", [decoy_line], ""))

    spans: list[Span] = []
    reference_parts: list[str] = []

    def add_span(text: str, label: Label, y: float) -> None:
        order = len(spans)
        spans.append(
            Span(
                id=order,
                text=text,
                bbox=BBox(MARGIN_X0, y, MARGIN_X1, y + LINE_HEIGHT - 2.0),
                order=order,
                gold_label=label,
            )
        )

    if spec.headers:
        add_span(rng.choice(HEADERS), Label.DELETE, 18.0)
    y = BODY_TOP
    for kind, texts, ref_part in blocks:
        label = Label.DELETE if kind == "formula" else Label.KEEP
        for text in texts:
            add_span(text, label, y)
            y += LINE_HEIGHT
        if ref_part:
            reference_parts.append(ref_part)
        y += LINE_HEIGHT / 2.0
    if spec.page_numbers:
        number = str(index + 1) if rng.random() < 0.5 else f"Page {index + 1} of {spec.pages}"
        add_span(number, Label.DELETE, 768.0)

    return Page(
        page_id=f"page_{index:04d}",
        width=PAGE_WIDTH,
        height=PAGE_HEIGHT,
        spans=spans,
        reference_markdown=" ".join(reference_parts),
    )


def generate_corpus(spec: GenSpec, out_dir: str | Path) -> Corpus:
    """Write one canonical JSON file per page; returns the generated pages."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pages = []
    for index in range(spec.pages):
        page = build_page(spec, index)
        save_page(page, out_dir / f"{page.page_id}.json")
        pages.append(page)
    return pages


class LosslessnessError(RuntimeError):
    """An assisted decode diverged from its greedy baseline."""

    def __init__(self, page_id: str, method: str, model: str):
        self.page_id = page_id
        super().__init__(
            f"assisted output differs from greedy output on page {page_id} (method={method}, model={model})"
        )


@dataclass(frozen=True)
class BenchConfig:
    corpus_dir: str | Path
    model: str = "replay"  # replay | ngram | perturbed
    methods: tuple[str, ...] = ("scratch", "mpld", "cld")
    use_cti: bool = True
    topping: bool = True
    classifier: str = "gold"
    tokenizer: str = "whitespace"  # whitespace | byte
    draft: DraftConfig = field(default_factory=DraftConfig)
    prompt_text: str = DEFAULT_INSTRUCTION
    max_new_tokens: int | None = None  # None: per page, len(reference) + 128
    jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.methods:
            raise ValueError("methods must be non-empty")
        unknown = set(self.methods) - {"scratch", "pld", "mpld", "cld"}
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.model not in ("replay", "ngram", "perturbed"):
            raise ValueError(f"unknown model kind {self.model!r}")


@dataclass
class PageStats:
    """Per-page, per-method decode record (the raw material of a BenchRow)."""

    page_id: str
    method: str
    stats: DecodeStats
    output: list[int]


@dataclass(frozen=True)
class BenchRow:
    method: str
    model: str
    pages: int
    fp_mean: float
    tok_per_pass: float
    wall_ms: float
    cti_ms: float
    speedup_fp: float
    speedup_wall: float

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "model": self.model,
            "pages": self.pages,
            "fp_mean": self.fp_mean,
            "tok_per_pass": self.tok_per_pass,
            "wall_ms": self.wall_ms,
            "cti_ms": self.cti_ms,
            "speedup_fp": self.speedup_fp,
            "speedup_wall": self.speedup_wall,
        }


def make_tokenizer(kind: str, pages: Corpus, prompt_text: str = DEFAULT_INSTRUCTION):
    if kind == "byte":
        return ByteTokenizer()
    if kind == "whitespace":
        texts = [prompt_text]
        for page in pages:
            texts.extend(span.text for span in page.spans)
            if page.reference_markdown is not None:
                texts.append(page.reference_markdown)
        return WhitespaceTokenizer.build(texts)
    raise ValueError(f"unknown tokenizer kind {kind!r}")


def make_model(kind: str, reference: list[int], prompt_len: int, *, seed: int, page_id: str):
    if kind == "replay":
        return ReplayModel(reference, prompt_len)
    if kind == "ngram":
        return NGramLM(order=3).train(reference)
    if kind == "perturbed":
        rng = random.Random(f"{seed}:{page_id}")
        k = max(1, len(reference) // 12)
        positions = rng.sample(range(len(reference)), min(k, len(reference)))
        return PerturbedReplay(reference, prompt_len, positions)
    raise ValueError(f"unknown model kind {kind!r}")


def decode_page(page: Page, config: BenchConfig, tokenizer) -> list[PageStats]:
    """Greedy baseline plus every requested method for one page.

    Raises LosslessnessError the moment any assisted output differs from
    the greedy baseline. The scratch record reuses the baseline stats.
    """
    if page.reference_markdown is None:
        raise PageSchemaError(f"page {page.page_id} has no reference_markdown")
    prompt = [BOS] + tokenizer.encode(config.prompt_text)
    reference = tokenizer.encode(page.reference_markdown)
    model = make_model(config.model, reference, len(prompt), seed=config.seed, page_id=page.page_id)
    cap = config.max_new_tokens or len(reference) + 128

    baseline, base_stats = greedy_decode(model, prompt, cap)
    results = []
    for method in config.methods:
        if method == "scratch":
            results.append(PageStats(page.page_id, "scratch", base_stats, baseline))
            continue
        session = session_for_page(
            page,
            tokenizer=tokenizer,
            model=model,
            method=method,
            config=config.draft,
            prompt_text=config.prompt_text,
            classifier=config.classifier,
            use_cti=config.use_cti,
            topping=config.topping,
        )
        output, stats = assisted_decode(session, prompt, cap)
        if output != baseline:
            raise LosslessnessError(page.page_id, method, config.model)
        if stats.tokens_emitted != stats.forward_passes + stats.candidate_tokens_accepted:
            raise AssertionError(f"stats ledger violated on page {page.page_id} ({method})")
        results.append(PageStats(page.page_id, method, stats, output))

    # The degenerate ablation must reproduce flat page lookup exactly.
    if "cld" in config.methods and not config.use_cti and not config.topping:
        cld = next(r for r in results if r.method == "cld")
        mpld = next((r for r in results if r.method == "mpld"), None)
        if mpld is not None and (cld.output != mpld.output or cld.stats.counters() != mpld.stats.counters()):
            raise AssertionError(
                f"cld with cti/topping off did not degrade to mpld on page {page.page_id}"
            )
    return results


def _decode_page_job(args):
    page, config, tokenizer = args
    return decode_page(page, config, tokenizer)


def run_page_stats(config: BenchConfig, pages: Corpus | None = None, tokenizer=None) -> list[PageStats]:
    """Decode the whole corpus; per-page records merged in page-id order."""
    if pages is None:
        pages = load_corpus(config.corpus_dir)
    if not pages:
        raise PageSchemaError(f"{config.corpus_dir}: corpus is empty")
    if tokenizer is None:
        tokenizer = make_tokenizer(config.tokenizer, pages, config.prompt_text)
    pages = sorted(pages, key=lambda p: p.page_id)
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(_decode_page_job, [(p, config, tokenizer) for p in pages]))
    else:
        chunks = [decode_page(page, config, tokenizer) for page in pages]
    return [record for chunk in chunks for record in chunk]


def aggregate_rows(records: list[PageStats], config: BenchConfig) -> list[BenchRow]:
    by_method: dict[str, list[PageStats]] = {}
    for record in records:
        by_method.setdefault(record.method, []).append(record)
    scratch = by_method.get("scratch")
    if scratch is None:
        raise ValueError("aggregation needs the scratch baseline records")

    def mean(values) -> float:
        values = list(values)
        return sum(values) / len(values)

    scratch_fp = mean(r.stats.forward_passes for r in scratch)
    scratch_wall = mean(r.stats.wall_time for r in scratch)
    rows = []
    for method in config.methods:
        recs = by_method[method]
        fp_mean = mean(r.stats.forward_passes for r in recs)
        wall_mean = mean(r.stats.wall_time for r in recs)
        rows.append(
            BenchRow(
                method=method,
                model=config.model,
                pages=len(recs),
                fp_mean=fp_mean,
                tok_per_pass=mean(r.stats.tokens_per_pass for r in recs),
                wall_ms=wall_mean * 1000.0,
                cti_ms=mean(r.stats.cti_time for r in recs) * 1000.0,
                speedup_fp=scratch_fp / fp_mean,
                speedup_wall=scratch_wall / wall_mean if wall_mean else 0.0,
            )
        )
    return rows


def run_benchmark(config: BenchConfig) -> list[BenchRow]:
    """Full harness: decode corpus, enforce losslessness, aggregate speedups."""
    methods = config.methods if "scratch" in config.methods else ("scratch",) + tuple(config.methods)
    config = replace(config, methods=tuple(methods))
    records = run_page_stats(config)
    return aggregate_rows(records, config)


REPORT_COLUMNS = [
    "method", "model", "pages", "fp_mean", "tok_per_pass",
    "wall_ms", "cti_ms", "speedup_fp", "speedup_wall",
]


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def emit_report(rows: list[BenchRow], fmt: str = "markdown") -> str:
    """Render rows as a Markdown pipe table or RFC-4180 CSV (stable column order)."""
    if not rows:
        raise ValueError("no rows to report")
    table = [[_format_cell(row.as_dict()[col]) for col in REPORT_COLUMNS] for row in rows]
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(REPORT_COLUMNS) + " |",
            "| " + " | ".join("---" for _ in REPORT_COLUMNS) + " |",
        ]
        lines.extend("| " + " | ".join(cells) + " |" for cells in table)
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        import csv
        import io

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(table)
        return buffer.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")
