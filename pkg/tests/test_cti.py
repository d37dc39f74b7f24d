import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagelookup import (
    HeuristicConfig,
    Label,
    TokenPrediction,
    classify_gold,
    classify_heuristic,
    math_symbol_density,
    span_label_f1,
    token_label_f1,
    vote_span_label,
)
from pagelookup.cti import PAGE_NUMBER_RE

from conftest import make_page, make_span

K, D = Label.KEEP, Label.DELETE

PROSE = "The quick brown fox ran over the lazy dog near the river bank today."
FORMULA = "\\alpha^2 + \\beta^2 = \\gamma^2"


def span_at_fraction(span_id, text, fraction, height=792.0):
    center = fraction * height
    return make_span(span_id, text, y=center - 6.0)


class TestHeuristic:
    def test_page_number_in_bottom_band_deleted(self):
        page = make_page([span_at_fraction(0, "17", 0.97)])
        assert classify_heuristic(page)[0] is D

    def test_prose_mid_page_kept(self):
        page = make_page([span_at_fraction(0, PROSE, 0.5)])
        assert classify_heuristic(page)[0] is K

    def test_math_span_mid_page_deleted(self):
        # Oracle: recompute the density by character count with the declared
        # symbol set (backslash, caret, underscore, =, +, sum/integral,
        # Greek; digits count because operators are present).
        operators = set("\\^_=+\u2211\u222b")
        symbolish = sum(1 for ch in FORMULA if ch in operators or ch.isdigit())
        density = symbolish / len(FORMULA)
        assert density > 0.25
        assert math_symbol_density(FORMULA) == pytest.approx(density)
        page = make_page([span_at_fraction(0, FORMULA, 0.5)])
        assert classify_heuristic(page)[0] is D

    def test_digits_without_operators_are_not_math(self):
        text = "in 1994 the survey counted 120000 responses over 12 months"
        assert math_symbol_density(text) == 0.0
        page = make_page([span_at_fraction(0, text, 0.5)])
        assert classify_heuristic(page)[0] is K

    def test_short_header_in_top_band_deleted(self):
        page = make_page([span_at_fraction(0, "Journal of Synthetic Results", 0.03)])
        assert classify_heuristic(page)[0] is D

    def test_long_text_in_band_not_header(self):
        long_text = PROSE + " " + PROSE  # >= 80 chars, no page number pattern
        page = make_page([span_at_fraction(0, long_text, 0.03)])
        assert classify_heuristic(page)[0] is K

    def test_page_number_pattern_variants(self):
        assert PAGE_NUMBER_RE.match("17")
        assert PAGE_NUMBER_RE.match("Page 3")
        assert PAGE_NUMBER_RE.match("page 3 of 12")
        assert not PAGE_NUMBER_RE.match("Chapter 3")

    def test_mid_page_number_is_kept(self):
        # Rule 1 requires the margin band, not just the pattern.
        page = make_page([span_at_fraction(0, "17", 0.5)])
        assert classify_heuristic(page)[0] is K

    def test_determinism_and_totality(self):
        page = make_page([
            span_at_fraction(0, PROSE, 0.4),
            span_at_fraction(1, FORMULA, 0.5),
            span_at_fraction(2, "3", 0.97),
        ])
        config = HeuristicConfig()
        first = classify_heuristic(page, config)
        second = classify_heuristic(page, config)
        assert first == second
        assert set(first) == {0, 1, 2}

    def test_config_overrides(self):
        page = make_page([span_at_fraction(0, FORMULA, 0.5)])
        lax = HeuristicConfig(math_density_threshold=0.99)
        assert classify_heuristic(page, lax)[0] is K

    def test_config_from_dict_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown"):
            HeuristicConfig.from_dict({"margin": 0.1})


class TestGold:
    def test_passthrough(self):
        page = make_page([make_span(0, "a", label=K), make_span(1, "b", y=320.0, label=D)])
        assert classify_gold(page) == {0: K, 1: D}

    def test_missing_label_names_span(self):
        page = make_page([
            make_span(0, "a", label=K),
            make_span(4, "b", order=1, y=320.0, label=None),
        ])
        with pytest.raises(ValueError, match="span 4"):
            classify_gold(page)


class TestVoting:
    def test_majority(self):
        assert vote_span_label([K, K, D]) is K
        assert vote_span_label([D, D, K]) is D

    def test_singleton(self):
        assert vote_span_label([D]) is D

    def test_tie_resolves_keep(self):
        assert vote_span_label([K, D]) is K

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            vote_span_label([])

    @given(st.lists(st.sampled_from([K, D]), min_size=1, max_size=15), st.randoms())
    @settings(max_examples=200)
    def test_permutation_invariance_and_mode(self, labels, rand):
        result = vote_span_label(labels)
        shuffled = list(labels)
        rand.shuffle(shuffled)
        assert vote_span_label(shuffled) is result
        keeps = labels.count(K)
        deletes = labels.count(D)
        assert result is (K if keeps >= deletes else D)


class TestF1:
    def test_perfect_match_mixed(self):
        labeling = {0: K, 1: D, 2: K}
        score = span_label_f1(labeling, dict(labeling))
        assert score.f1 == 1.0

    def test_all_wrong(self):
        pred = {i: D for i in range(4)}
        gold = {i: K for i in range(4)}
        score = span_label_f1(pred, gold)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_hand_counted_confusion(self):
        # 4 gold KEEP; prediction keeps 3 of them plus 1 false KEEP:
        # TP=3, FP=1, FN=1 -> P = R = F1 = 0.75.
        gold = {0: K, 1: K, 2: K, 3: K, 4: D}
        pred = {0: K, 1: K, 2: K, 3: D, 4: K}
        score = span_label_f1(pred, gold)
        assert score.precision == pytest.approx(0.75)
        assert score.recall == pytest.approx(0.75)
        assert score.f1 == pytest.approx(0.75)

    def test_no_positives_anywhere_is_perfect(self):
        score = span_label_f1({0: D}, {0: D})
        assert score.f1 == 1.0

    def test_id_mismatch_errors(self):
        with pytest.raises(ValueError, match="span ids"):
            span_label_f1({0: K}, {1: K})

    def test_token_level(self):
        pred = [TokenPrediction(0, 0, K), TokenPrediction(0, 1, D)]
        gold = [TokenPrediction(0, 0, K), TokenPrediction(0, 1, K)]
        score = token_label_f1(pred, gold)
        assert score.precision == 1.0
        assert score.recall == pytest.approx(0.5)

    def test_token_level_mismatch_errors(self):
        with pytest.raises(ValueError, match="token"):
            token_label_f1([TokenPrediction(0, 0, K)], [TokenPrediction(0, 1, K)])
