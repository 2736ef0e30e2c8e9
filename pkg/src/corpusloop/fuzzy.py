"""Orthographic similarity: edit distance, fuzzy sentence scoring, and
spelling suggestions against a vocabulary.

All distances operate on Unicode scalar values, never bytes, so multi-byte
characters and orthographic apostrophes each count as one symbol.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FuzzyConfig:
    suggestion_threshold: int = 2
    max_suggestions: int = 5

    def __post_init__(self) -> None:
        if self.suggestion_threshold < 0:
            raise ValueError("suggestion_threshold must be non-negative")
        if self.max_suggestions < 1:
            raise ValueError("max_suggestions must be at least 1")


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions, deletions, and substitutions turning a into b."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    # single-row DP over the shorter string
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1,          # deletion
                           cur[j - 1] + 1,       # insertion
                           prev[j - 1] + (ca != cb)))  # substitution
        prev = cur
    return prev[-1]


def normalized_similarity(a: str, b: str) -> float:
    """1 - distance / max length, in [0, 1]; two empty strings score 1."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def fuzzy_sentence_score(query_tokens, sentence_tokens) -> float:
    """Mean over query tokens of the best similarity to any sentence token."""
    if not query_tokens:
        raise ValueError("query_tokens must be non-empty")
    if not sentence_tokens:
        return 0.0
    total = 0.0
    for q in query_tokens:
        total += max(normalized_similarity(q, s) for s in sentence_tokens)
    return total / len(query_tokens)


def suggest_corrections(word: str, vocabulary, config: FuzzyConfig = FuzzyConfig()) -> list[tuple[str, int]]:
    """Vocabulary words within the edit-distance threshold, closest first.

    An exact match short-circuits to just that word. Ties are broken
    lexicographically and the list is truncated to ``max_suggestions``.
    """
    if word in vocabulary:
        return [(word, 0)]
    hits = []
    for candidate in vocabulary:
        d = levenshtein(word, candidate)
        if d <= config.suggestion_threshold:
            hits.append((candidate, d))
    hits.sort(key=lambda wd: (wd[1], wd[0]))
    return hits[:config.max_suggestions]
