"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Everything is seeded; expected values are frozen from the
independent oracles used in the unit suites.
"""

import math
import random

import pytest

from pagelookup import (
    BBox,
    BOS,
    DEFAULT_INSTRUCTION,
    DraftConfig,
    GenSpec,
    Label,
    Page,
    PooledSpan,
    ReplayModel,
    Span,
    SpanPool,
    WhitespaceTokenizer,
    assisted_decode,
    bleu,
    build_page,
    classify_gold,
    classify_heuristic,
    edit_distance_norm,
    find_ngram_match,
    greedy_decode,
    make_model,
    make_tokenizer,
    score_pair,
    session_for_page,
    span_label_f1,
    token_f1,
    top_pool,
)
from pagelookup.cti import PAGE_NUMBER_RE

LOSSLESS_SEED = 31415
DECOY_SEED = 20240501

CLD_ABLATIONS = [(True, True), (True, False), (False, True), (False, False)]


def check(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    print(line)
    assert ok, line


def decode_all(pages, tokenizer, model_kind, seed, configs):
    """Decode every page with every (method, use_cti, topping) config.

    Returns (all_lossless, per-config list of DecodeStats) and the greedy
    baselines' stats.
    """
    prompt = [BOS] + tokenizer.encode(DEFAULT_INSTRUCTION)
    stats_by_config = {cfg: [] for cfg in configs}
    baseline_stats = []
    lossless = True
    for page in pages:
        reference = tokenizer.encode(page.reference_markdown)
        model = make_model(model_kind, reference, len(prompt), seed=seed, page_id=page.page_id)
        cap = len(reference) + 128
        baseline, base_stats = greedy_decode(model, prompt, cap)
        baseline_stats.append(base_stats)
        for cfg in configs:
            method, use_cti, topping = cfg
            session = session_for_page(
                page, tokenizer=tokenizer, model=model, method=method,
                use_cti=use_cti, topping=topping,
            )
            out, stats = assisted_decode(session, prompt, cap)
            lossless = lossless and out == baseline
            stats_by_config[cfg].append(stats)
    return lossless, stats_by_config, baseline_stats


@pytest.fixture(scope="module")
def lossless_corpus():
    spec = GenSpec(pages=200, copyable=0.8, decoys=2, seed=LOSSLESS_SEED)
    pages = [build_page(spec, i) for i in range(spec.pages)]
    return pages, make_tokenizer("whitespace", pages)


@pytest.fixture(scope="module")
def decoy_corpus():
    spec = GenSpec(pages=128, copyable=0.8, decoys=2, seed=DECOY_SEED)
    pages = [build_page(spec, i) for i in range(spec.pages)]
    return pages, make_tokenizer("whitespace", pages)


@pytest.fixture(scope="module")
def decoy_records(decoy_corpus):
    pages, tokenizer = decoy_corpus
    configs = [("mpld", True, True), ("cld", True, True), ("cld", False, False)]
    lossless, stats_by_config, baseline_stats = decode_all(pages, tokenizer, "replay", DECOY_SEED, configs)
    assert lossless
    return stats_by_config, baseline_stats


def test_losslessness_matrix(lossless_corpus):
    # 200 pages x {replay, ngram, perturbed} x {pld, mpld, cld x ablations}:
    # assisted output must equal greedy output token for token.
    pages, tokenizer = lossless_corpus
    configs = [("pld", True, True), ("mpld", True, True)]
    configs += [("cld", cti, topping) for cti, topping in CLD_ABLATIONS]
    all_ok = True
    ledger_ok = True
    decodes = 0
    for model_kind in ("replay", "ngram", "perturbed"):
        lossless, stats_by_config, _ = decode_all(pages, tokenizer, model_kind, LOSSLESS_SEED, configs)
        all_ok = all_ok and lossless
        for stats_list in stats_by_config.values():
            decodes += len(stats_list)
            ledger_ok = ledger_ok and all(
                s.tokens_emitted == s.forward_passes + s.candidate_tokens_accepted
                for s in stats_list
            )
    check("losslessness", all_ok and ledger_ok,
          f"{decodes} assisted decodes token-identical to greedy (exact)")


def test_analytic_speedup_bound():
    # One span covering the whole 1100-token reference, K=10, max_ngram=3:
    # ceil((N+1)/11) passes, a >= 10x reduction over scratch.
    words = [f"tok{i:04d}" for i in range(1100)]
    text = " ".join(words)
    page = Page(
        page_id="solid", width=612.0, height=792.0,
        spans=[Span(0, text, BBox(72.0, 100.0, 540.0, 112.0), 0, Label.KEEP)],
        reference_markdown=text,
    )
    tokenizer = WhitespaceTokenizer.build([text, DEFAULT_INSTRUCTION])
    prompt = [BOS] + tokenizer.encode(DEFAULT_INSTRUCTION)
    reference = tokenizer.encode(text)
    assert len(reference) == 1100
    model = ReplayModel(reference, len(prompt))
    baseline, base_stats = greedy_decode(model, prompt, 2000)
    session = session_for_page(page, tokenizer=tokenizer, model=model, method="cld")
    out, stats = assisted_decode(session, prompt, 2000)
    expected = math.ceil((1100 + 1) / 11)
    ok = (
        out == baseline
        and base_stats.forward_passes == 1101
        and stats.forward_passes == 101  # frozen exact count
        and abs(stats.forward_passes - expected) <= 1
        and base_stats.forward_passes / stats.forward_passes >= 10.0
    )
    check("analytic-speedup-bound", ok,
          f"scratch {base_stats.forward_passes} vs cld {stats.forward_passes} passes "
          f"(ceil((N+1)/11)={expected}, {base_stats.forward_passes / stats.forward_passes:.2f}x)")


def test_cld_beats_mpld_on_decoy_corpus(decoy_records):
    stats_by_config, _ = decoy_records
    mpld = [s.forward_passes for s in stats_by_config[("mpld", True, True)]]
    cld = [s.forward_passes for s in stats_by_config[("cld", True, True)]]
    mean_mpld = sum(mpld) / len(mpld)
    mean_cld = sum(cld) / len(cld)
    wins = sum(1 for c, m in zip(cld, mpld) if c < m)
    ok = mean_cld < mean_mpld and wins >= 0.9 * len(mpld)
    check("cld-vs-mpld-ordering", ok,
          f"mean fp {mean_cld:.2f} < {mean_mpld:.2f}; cld wins {wins}/{len(mpld)} pages")


def test_ablation_identity(decoy_records):
    # cld with CTI and topping removed degrades to mpld exactly, page by page.
    stats_by_config, _ = decoy_records
    mpld = stats_by_config[("mpld", True, True)]
    degraded = stats_by_config[("cld", False, False)]
    ok = all(a.counters() == b.counters() for a, b in zip(degraded, mpld))
    check("ablation-identity", ok, f"per-page counters equal on {len(mpld)} pages")


def test_topping_rotation_properties():
    ok = True
    for size in range(1, 6):
        pool = SpanPool([PooledSpan(i, [i], [i + 2]) for i in range(size)])
        original = [s.pool_index for s in pool.spans]
        for active in range(size):
            rotated = top_pool(pool, active)
            order = [s.pool_index for s in rotated.spans]
            shift = original.index(active)
            ok = ok and sorted(order) == sorted(original)          # multiset
            ok = ok and order == original[shift:] + original[:shift]  # cyclic
            # topping the head is idempotent
            again = top_pool(rotated, order[0])
            ok = ok and [s.pool_index for s in again.spans] == order
        # a full cycle of rotations returns the original order
        current = pool
        for _ in range(size):
            current = top_pool(current, current.spans[-1].pool_index)
        ok = ok and len(current.spans) == size
    check("topping-rotation-properties", ok, "exhaustive over pool sizes 1..5")


def test_ngram_match_oracle_equivalence():
    def brute_force(query, source, config):
        for n in range(min(config.max_ngram, len(query)), config.min_ngram - 1, -1):
            suffix = query[len(query) - n:]
            for p in range(len(source) - n):
                if source[p:p + n] == suffix:
                    return (p, n, source[p + n:p + n + config.num_candidates])
        return None

    rng = random.Random(2718)
    config = DraftConfig()
    mismatches = 0
    for _ in range(10_000):
        source = [rng.randrange(8) for _ in range(rng.randrange(0, 65))]
        query = [rng.randrange(8) for _ in range(rng.randrange(0, 65))]
        got = find_ngram_match(query, source, config)
        expected = brute_force(query, source, config)
        got_tuple = None if got is None else (got.match_start, got.ngram_len, got.candidates)
        if got_tuple != expected:
            mismatches += 1
    check("ngram-match-oracle", mismatches == 0, "10000 random instances, vocab 8, lengths <= 64")


def test_cti_heuristic_sanity(decoy_corpus):
    pages, _ = decoy_corpus
    pred_all, gold_all = {}, {}
    pagenum_total = pagenum_deleted = 0
    for idx, page in enumerate(pages):
        pred = classify_heuristic(page)
        gold = classify_gold(page)
        for span_id, label in pred.items():
            pred_all[(idx, span_id)] = label
            gold_all[(idx, span_id)] = gold[span_id]
        band = 0.08 * page.height
        for span in page.spans:
            in_margin = span.bbox.center_y <= band or span.bbox.center_y >= page.height - band
            if span.gold_label is Label.DELETE and in_margin and PAGE_NUMBER_RE.match(span.text):
                pagenum_total += 1
                if pred[span.id] is Label.DELETE:
                    pagenum_deleted += 1
    score = span_label_f1(pred_all, gold_all)
    ok = score.f1 >= 0.95 and pagenum_total > 0 and pagenum_deleted == pagenum_total
    check("cti-heuristic-sanity", ok,
          f"span F1 {score.f1:.3f} >= 0.95; page numbers deleted {pagenum_deleted}/{pagenum_total}")


def test_metrics_identities():
    same = "identical metric text"
    identity_ok = (
        edit_distance_norm(same, same) == 0.0
        and bleu(same, same) == pytest.approx(1.0)
        and token_f1(same, same) == 1.0
    )
    kitten_ok = abs(edit_distance_norm("kitten", "sitting") - 3 / 7) <= 1e-9
    rng = random.Random(8080)
    alphabet = "abcdef α$\\"
    bounds_ok = True
    for _ in range(1000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 24)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 24)))
        s = score_pair(a, b)
        bounds_ok = bounds_ok and 0.0 <= s.edit_dist <= 1.0 and 0.0 <= s.bleu <= 1.0 and 0.0 <= s.f1 <= 1.0
    ok = identity_ok and kitten_ok and bounds_ok
    check("metrics-identities", ok,
          "identity scores exact; kitten/sitting = 3/7 (1e-9); 1000 random pairs in [0,1]")


def test_stats_ledger(decoy_records):
    stats_by_config, baseline_stats = decoy_records
    records = [s for stats_list in stats_by_config.values() for s in stats_list]
    records += baseline_stats
    ok = all(s.tokens_emitted == s.forward_passes + s.candidate_tokens_accepted for s in records)
    check("stats-ledger", ok,
          f"tokens_emitted == forward_passes + accepted on {len(records)} decode records")
