import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagelookup import bleu, edit_distance_norm, levenshtein, score_pair, token_f1


def dp_levenshtein(a, b):
    """Classic full-table DP oracle."""
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[-1][-1]


class TestEditDistance:
    def test_identity(self):
        assert edit_distance_norm("same text", "same text") == 0.0

    def test_one_side_empty(self):
        assert edit_distance_norm("abc", "") == 1.0
        assert edit_distance_norm("", "abc") == 1.0

    def test_both_empty(self):
        assert edit_distance_norm("", "") == 0.0

    def test_kitten_sitting(self):
        assert dp_levenshtein("kitten", "sitting") == 3
        assert levenshtein("kitten", "sitting") == 3
        assert edit_distance_norm("kitten", "sitting") == pytest.approx(3 / 7, abs=1e-9)

    def test_against_dp_oracle_seeded(self):
        rng = random.Random(5)
        alphabet = "abcdαβ "
        for _ in range(300):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 12)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 12)))
            assert levenshtein(a, b) == dp_levenshtein(a, b)

    @given(st.text(max_size=30), st.text(max_size=30))
    @settings(max_examples=200)
    def test_bounds_and_symmetry(self, a, b):
        d = edit_distance_norm(a, b)
        assert 0.0 <= d <= 1.0
        assert d == edit_distance_norm(b, a)


class TestBleu:
    def test_identical(self):
        assert bleu("the cat sat on the mat", "the cat sat on the mat") == pytest.approx(1.0)

    def test_identical_short_text(self):
        # shorter than 4 tokens: zero-match orders smooth to 1
        assert bleu("hi there", "hi there") == pytest.approx(1.0)

    def test_empty_pred(self):
        assert bleu("", "reference") == 0.0

    def test_hand_computed_case(self):
        # pred "a b c d" vs ref "a b c e" with the declared smoothing:
        # p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = (0+1)/(1+1) = 1/2; BP = 1.
        expected = (3 / 4 * 2 / 3 * 1 / 2 * 1 / 2) ** 0.25
        assert expected == pytest.approx(0.125 ** 0.25)
        assert bleu("a b c d", "a b c e") == pytest.approx(expected, abs=1e-12)

    def test_brevity_penalty(self):
        # pred is a 2-token prefix of a 4-token ref: BP = exp(1 - 4/2)
        score_short = bleu("a b", "a b c d")
        p1, p2 = 1.0, 1.0
        p3, p4 = 1.0, 1.0  # zero-total orders smooth to (0+1)/(0+1)
        expected = math.exp(1 - 4 / 2) * (p1 * p2 * p3 * p4) ** 0.25
        assert score_short == pytest.approx(expected, abs=1e-12)

    @given(st.text(alphabet="ab ", max_size=40), st.text(alphabet="ab ", max_size=40))
    @settings(max_examples=200)
    def test_bounds(self, a, b):
        assert 0.0 <= bleu(a, b) <= 1.0


class TestTokenF1:
    def test_identical(self):
        assert token_f1("x y z", "x y z") == 1.0

    def test_disjoint(self):
        assert token_f1("a b", "c d") == 0.0

    def test_multiset_hand_case(self):
        # pred "a a b" vs ref "a b b": overlap multiset {a, b} -> P = R = 2/3.
        assert token_f1("a a b", "a b b") == pytest.approx(2 / 3)

    def test_both_empty(self):
        assert token_f1("", "") == 1.0

    def test_one_empty(self):
        assert token_f1("", "a") == 0.0
        assert token_f1("a", "") == 0.0


class TestScorePair:
    def test_bundles_all_three(self):
        scores = score_pair("same", "same")
        assert scores.edit_dist == 0.0
        assert scores.bleu == pytest.approx(1.0)
        assert scores.f1 == 1.0
        assert set(scores.as_dict()) == {"edit_dist", "bleu", "f1"}

    def test_identical_outputs_score_identically(self):
        # Operationally: assisted and scratch outputs are the same string,
        # so their quality scores cannot differ.
        ref = "reference markdown $$x$$ text"
        out = "reference markdown text"
        assert score_pair(out, ref) == score_pair(out, ref)

    def test_random_pairs_in_bounds(self):
        rng = random.Random(17)
        alphabet = "abik é$"
        for _ in range(250):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 20)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 20)))
            scores = score_pair(a, b)
            assert 0.0 <= scores.edit_dist <= 1.0
            assert 0.0 <= scores.bleu <= 1.0
            assert 0.0 <= scores.f1 <= 1.0
