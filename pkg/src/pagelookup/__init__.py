"""Lossless assisted generation for PDF-to-Markdown conversion.

Draft token runs are looked up in the PDF page itself (flat page text, or
an ordered pool of copyable spans kept in sync with conversion progress)
and verified in batched greedy passes, so the output is token-identical to
plain greedy decoding while consuming far fewer forward passes on
copy-dense pages. Deterministic oracle models make the acceptance behavior
and the speedup accounting exactly testable without GPU-scale backbones.
"""

from .docmodel import (
    BBox,
    Corpus,
    Label,
    Page,
    PageSchemaError,
    Span,
    load_corpus,
    load_page,
    save_page,
    validate_page,
)
from .tokenizers import BOS, EOS, ByteTokenizer, WhitespaceTokenizer
from .cti import (
    ClassifierContract,
    F1Score,
    HeuristicConfig,
    SpanLabeling,
    TokenPrediction,
    classify_gold,
    classify_heuristic,
    math_symbol_density,
    span_label_f1,
    token_label_f1,
    vote_span_label,
)
from .draft import (
    CopyLookup,
    DraftConfig,
    MatchResult,
    PageLookup,
    PooledSpan,
    PromptLookup,
    SpanPool,
    build_span_pool,
    find_ngram_match,
    flat_page_tokens,
    propose_cld,
    propose_mpld,
    propose_pld,
    top_pool,
)
from .engine import (
    DEFAULT_INSTRUCTION,
    DecodeSession,
    DecodeStats,
    ModelInterface,
    VerificationOutcome,
    assisted_decode,
    greedy_decode,
    session_for_page,
    verify_candidates,
)
from .models import NGramLM, PerturbedReplay, ReplayModel
from .metrics import QualityScores, bleu, edit_distance_norm, levenshtein, score_pair, token_f1
from .bench import (
    BenchConfig,
    BenchRow,
    GenSpec,
    LosslessnessError,
    PageStats,
    build_page,
    emit_report,
    generate_corpus,
    make_model,
    make_tokenizer,
    run_benchmark,
    run_page_stats,
)

__version__ = "0.1.0"

__all__ = [
    "BBox", "Corpus", "Label", "Page", "PageSchemaError", "Span",
    "load_corpus", "load_page", "save_page", "validate_page",
    "BOS", "EOS", "ByteTokenizer", "WhitespaceTokenizer",
    "ClassifierContract", "F1Score", "HeuristicConfig", "SpanLabeling",
    "TokenPrediction", "classify_gold", "classify_heuristic",
    "math_symbol_density", "span_label_f1", "token_label_f1", "vote_span_label",
    "CopyLookup", "DraftConfig", "MatchResult", "PageLookup", "PooledSpan",
    "PromptLookup", "SpanPool", "build_span_pool", "find_ngram_match",
    "flat_page_tokens", "propose_cld", "propose_mpld", "propose_pld", "top_pool",
    "DEFAULT_INSTRUCTION", "DecodeSession", "DecodeStats", "ModelInterface",
    "VerificationOutcome", "assisted_decode", "greedy_decode",
    "session_for_page", "verify_candidates",
    "NGramLM", "PerturbedReplay", "ReplayModel",
    "QualityScores", "bleu", "edit_distance_norm", "levenshtein", "score_pair", "token_f1",
    "BenchConfig", "BenchRow", "GenSpec", "LosslessnessError", "PageStats",
    "build_page", "emit_report", "generate_corpus", "make_model",
    "make_tokenizer", "run_benchmark", "run_page_stats",
]
