"""The feedback-loop search engine.

A Session tracks one user's query, judgments, and which sentences have
already been shown. Each round scores every not-yet-shown sentence, returns
the top k, and (after the first round) recenters the query vector on the
mean of the sentences the user marked relevant. Irrelevant sentences are
simply discarded; they are never subtracted from the query.
"""

from __future__ import annotations

import csv
import io
import json
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from .corpus import TokenizerConfig, tokenize
from .embeddings import EmbeddingModel, IndexEntry, SentenceIndex, cosine, sentence_vector
from .fuzzy import fuzzy_sentence_score

EXPORT_FORMATS = ("txt", "csv", "json")


class ValidationError(Exception):
    """Raised when a request violates a session operation's contract."""


@dataclass(frozen=True)
class SearchMode:
    kind: str  # "embedding" | "fuzzy" | "hybrid"
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in ("embedding", "fuzzy", "hybrid"):
            raise ValidationError(f"unknown search mode: {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha must be in [0, 1]")


@dataclass(frozen=True)
class SearchResult:
    sentence_id: int
    text: str
    score: float
    rank: int


@dataclass
class Session:
    session_id: str
    query_text: str
    query_tokens: list[str]
    query_vector: np.ndarray | None
    k: int
    mode: SearchMode
    relevant: set[int] = field(default_factory=set)
    irrelevant: set[int] = field(default_factory=set)
    shown: set[int] = field(default_factory=set)
    created_at: float = field(default_factory=time.time)
    tokenizer_config: TokenizerConfig = TokenizerConfig()
    # ids in the order they were first marked relevant, for export
    relevant_order: list[int] = field(default_factory=list)
    rounds: int = 0


def create_session(index: SentenceIndex, model: EmbeddingModel, query_text: str,
                   mode: SearchMode = SearchMode("embedding"), k: int = 5,
                   tokenizer_config: TokenizerConfig = TokenizerConfig()) -> Session:
    """Start a session from a query sentence; no results are fetched yet."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    tokens = tokenize(query_text, tokenizer_config)
    if not tokens:
        raise ValidationError("query must contain at least one token")
    vector = None
    if mode.kind in ("embedding", "hybrid"):
        vector = sentence_vector(model, tokens)
    return Session(session_id=uuid.uuid4().hex, query_text=query_text,
                   query_tokens=tokens, query_vector=vector, k=k, mode=mode,
                   tokenizer_config=tokenizer_config)


def score(session: Session, entry: IndexEntry) -> float:
    """Score one index entry against the session's current query."""
    kind = session.mode.kind
    if kind == "embedding":
        return cosine(session.query_vector, entry.vector)
    sentence_tokens = tokenize(entry.text, session.tokenizer_config)
    fuzzy = fuzzy_sentence_score(session.query_tokens, sentence_tokens)
    if kind == "fuzzy":
        return fuzzy
    cos = cosine(session.query_vector, entry.vector)
    alpha = session.mode.alpha
    return alpha * (1.0 + cos) / 2.0 + (1.0 - alpha) * fuzzy


def update_query_vector(session: Session, index: SentenceIndex) -> np.ndarray:
    """Recenter the query on the mean of the relevant sentences' vectors.

    With nothing marked relevant the query vector is left unchanged.
    """
    if session.relevant and session.query_vector is not None:
        by_id = {e.sentence_id: e for e in index.entries}
        vectors = [by_id[sid].vector for sid in sorted(session.relevant)]
        session.query_vector = np.mean(np.asarray(vectors, dtype=np.float64), axis=0)
    return session.query_vector


def next_results(session: Session, index: SentenceIndex,
                 model: EmbeddingModel | None = None) -> list[SearchResult]:
    """Return the top-k unshown sentences for the current query.

    After the first round the query vector is refreshed from relevance
    feedback before scoring. Returned ids join the shown set and are never
    returned again; an exhausted corpus yields an empty list.
    """
    if session.rounds > 0 and session.mode.kind in ("embedding", "hybrid"):
        update_query_vector(session, index)
    scored = [
        (score(session, entry), entry)
        for entry in index.entries
        if entry.sentence_id not in session.shown
    ]
    scored.sort(key=lambda se: (-se[0], se[1].sentence_id))
    batch = scored[:session.k]
    results = [
        SearchResult(sentence_id=entry.sentence_id, text=entry.text,
                     score=s, rank=rank)
        for rank, (s, entry) in enumerate(batch, start=1)
    ]
    session.shown.update(r.sentence_id for r in results)
    session.rounds += 1
    return results


def record_feedback(session: Session, sentence_id: int, relevant: bool) -> Session:
    """Mark a shown sentence relevant or irrelevant; a re-mark overrides."""
    if sentence_id not in session.shown:
        raise ValidationError(f"sentence {sentence_id} was never shown in this session")
    session.relevant.discard(sentence_id)
    session.irrelevant.discard(sentence_id)
    if relevant:
        session.relevant.add(sentence_id)
        if sentence_id not in session.relevant_order:
            session.relevant_order.append(sentence_id)
    else:
        session.irrelevant.add(sentence_id)
    return session


def exported_ids(session: Session) -> list[int]:
    """Relevant sentence ids in the order they were first marked relevant."""
    return [sid for sid in session.relevant_order if sid in session.relevant]


def export(session: Session, index: SentenceIndex, format: str) -> bytes:
    """Serialize the relevant sentences as txt, csv, or json (UTF-8 bytes)."""
    if format not in EXPORT_FORMATS:
        raise ValidationError(f"unknown export format: {format!r}")
    by_id = {e.sentence_id: e for e in index.entries}
    rows = [(sid, by_id[sid].text) for sid in exported_ids(session)]
    if format == "txt":
        return "".join(text + "\n" for _, text in rows).encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["sentence_id", "text"])
        writer.writerows(rows)
        return buf.getvalue().encode("utf-8")
    return json.dumps([{"id": sid, "text": text} for sid, text in rows],
                      ensure_ascii=False).encode("utf-8")
