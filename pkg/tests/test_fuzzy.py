import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusloop.fuzzy import (
    FuzzyConfig,
    fuzzy_sentence_score,
    levenshtein,
    normalized_similarity,
    suggest_corrections,
)


def dp_levenshtein(a: str, b: str) -> int:
    """Independent full-matrix dynamic-programming oracle."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[m][n]


words = st.text(max_size=30)


class TestLevenshtein:
    def test_identity(self):
        assert levenshtein("abc", "abc") == 0

    def test_prefix_case(self):
        assert levenshtein("he'ih", "he'ihce'") == 3

    def test_kitten_sitting(self):
        # frozen from the DP oracle
        assert dp_levenshtein("kitten", "sitting") == 3
        assert levenshtein("kitten", "sitting") == 3

    def test_empty_strings(self):
        assert levenshtein("", "") == 0
        assert levenshtein("", "abc") == 3

    def test_unicode_scalars_not_bytes(self):
        # each multi-byte character counts as one symbol
        assert levenshtein("héllo", "hello") == 1
        assert levenshtein("3ebio", "3ebio") == 0

    @given(words, words)
    @settings(max_examples=300)
    def test_agrees_with_dp_oracle(self, a, b):
        assert levenshtein(a, b) == dp_levenshtein(a, b)

    @given(words, words)
    def test_symmetry_and_identity_of_indiscernibles(self, a, b):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert (levenshtein(a, b) == 0) == (a == b)

    @given(words, words, words)
    @settings(max_examples=200)
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    @given(words, words)
    def test_length_bounds(self, a, b):
        d = levenshtein(a, b)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b), 0)


class TestNormalizedSimilarity:
    def test_equal(self):
        assert normalized_similarity("abc", "abc") == 1.0

    def test_full_substitution(self):
        assert normalized_similarity("a", "b") == 0.0

    def test_prefix_case(self):
        assert normalized_similarity("he'ih", "he'ihce'") == 0.625

    def test_both_empty(self):
        assert normalized_similarity("", "") == 1.0

    @given(words, words)
    def test_in_unit_interval(self, a, b):
        assert 0.0 <= normalized_similarity(a, b) <= 1.0


class TestFuzzySentenceScore:
    def test_exact_token_present(self):
        assert fuzzy_sentence_score(["abc"], ["abc", "xyz"]) == 1.0

    def test_half_covered(self):
        assert fuzzy_sentence_score(["abc", "def"], ["abc"]) == 0.5

    def test_morphological_elaboration(self):
        query = ["he'ih"]
        sent = ["ceese'", "he'ihce'ciiciinen"]
        expected = max(
            1 - dp_levenshtein("he'ih", "ceese'") / max(5, 6),
            1 - dp_levenshtein("he'ih", "he'ihce'ciiciinen") / max(5, 17),
        )
        got = fuzzy_sentence_score(query, sent)
        assert got == pytest.approx(expected)
        assert 0.0 < got < 1.0

    def test_empty_sentence(self):
        assert fuzzy_sentence_score(["a"], []) == 0.0

    def test_empty_query_is_error(self):
        with pytest.raises(ValueError):
            fuzzy_sentence_score([], ["a"])

    def test_all_query_tokens_verbatim_scores_one(self):
        assert fuzzy_sentence_score(["a", "b"], ["x", "b", "a", "y"]) == 1.0


class TestSuggestCorrections:
    def test_exact_match_short_circuits(self):
        assert suggest_corrections("cat", {"cat", "dog"}) == [("cat", 0)]

    def test_threshold_filters(self):
        cfg = FuzzyConfig(suggestion_threshold=1)
        assert suggest_corrections("cot", {"cat", "dog"}, cfg) == [("cat", 1)]

    def test_truncates_to_max_suggestions(self):
        vocab = {f"cat{i}" for i in range(7)}
        out = suggest_corrections("cat", vocab, FuzzyConfig(suggestion_threshold=2))
        assert len(out) == 5

    def test_sorted_by_distance_then_word(self):
        vocab = {"cab", "cot", "bat", "cart"}
        out = suggest_corrections("cat", vocab, FuzzyConfig(suggestion_threshold=2))
        assert out == sorted(out, key=lambda wd: (wd[1], wd[0]))
        assert all(d <= 2 for _, d in out)

    def test_nothing_within_threshold(self):
        assert suggest_corrections("zzz", {"cat"}, FuzzyConfig(suggestion_threshold=1)) == []
