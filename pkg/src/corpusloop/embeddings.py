"""Subword skip-gram embeddings trained with negative sampling.

Words are represented as the mean of a whole-word vector and hashed
character n-gram vectors, so out-of-vocabulary words still receive
embeddings. Sentence vectors are the arithmetic mean of their tokens'
word vectors. Training is single-threaded and fully deterministic for a
given (corpus, hyperparameters) pair.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Corpus

MODEL_MAGIC = b"TITL-EMB"
INDEX_MAGIC = b"TITL-IDX"
FORMAT_VERSION = 1

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193


class TrainingError(Exception):
    """Raised when training cannot proceed (empty corpus, empty vocabulary)."""


class FormatError(Exception):
    """Raised when a model or index file is malformed; message names the field."""


@dataclass(frozen=True)
class Hyperparams:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 10
    lr0: float = 0.05
    ngram_min: int = 3
    ngram_max: int = 6
    buckets: int = 2_000_000
    min_count: int = 1
    subsample_t: float = 1e-4
    seed: int = 1

    def __post_init__(self) -> None:
        if self.ngram_min > self.ngram_max:
            raise ValueError("ngram_min must be <= ngram_max")
        for name in ("dim", "window", "negatives", "epochs", "ngram_min",
                     "ngram_max", "buckets", "min_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if self.subsample_t < 0:
            raise ValueError("subsample_t must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def extract_ngrams(word: str, ngram_min: int, ngram_max: int) -> list[str]:
    """Character n-grams of the boundary-wrapped word, shortest length first.

    The word is wrapped as ``<word>`` and n-grams are taken over Unicode
    characters. The full wrapped form is excluded (it corresponds to the
    whole-word vector) unless it is the only n-gram available.
    """
    wrapped = "<" + word + ">"
    n_chars = len(wrapped)
    grams: list[str] = []
    for n in range(ngram_min, ngram_max + 1):
        for i in range(n_chars - n + 1):
            grams.append(wrapped[i:i + n])
    if len(grams) > 1:
        grams = [g for g in grams if g != wrapped]
    return grams


def hash_ngram(ngram: str, buckets: int) -> int:
    """FNV-1a 32-bit hash of the n-gram's UTF-8 bytes, modulo ``buckets``."""
    h = _FNV_OFFSET
    for byte in ngram.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h % buckets


@dataclass
class EmbeddingModel:
    hyperparams: Hyperparams
    vocab: dict[str, tuple[int, int]]  # word -> (index, corpus count)
    input_word_vectors: np.ndarray     # |vocab| x dim, float32
    input_bucket_vectors: np.ndarray   # buckets x dim, float32
    output_vectors: np.ndarray         # |vocab| x dim, float32
    _subword_cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.hyperparams.dim

    def subword_ids(self, word: str) -> np.ndarray:
        """Bucket ids of the word's character n-grams (duplicates kept)."""
        cached = self._subword_cache.get(word)
        if cached is None:
            hp = self.hyperparams
            grams = extract_ngrams(word, hp.ngram_min, hp.ngram_max)
            cached = np.array([hash_ngram(g, hp.buckets) for g in grams], dtype=np.int64)
            self._subword_cache[word] = cached
        return cached

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingModel):
            return NotImplemented
        return (
            self.hyperparams == other.hyperparams
            and self.vocab == other.vocab
            and np.array_equal(self.input_word_vectors, other.input_word_vectors)
            and np.array_equal(self.input_bucket_vectors, other.input_bucket_vectors)
            and np.array_equal(self.output_vectors, other.output_vectors)
        )


@dataclass(frozen=True)
class IndexEntry:
    sentence_id: int
    text: str
    vector: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexEntry):
            return NotImplemented
        return (
            self.sentence_id == other.sentence_id
            and self.text == other.text
            and np.array_equal(self.vector, other.vector)
        )


@dataclass
class SentenceIndex:
    dim: int
    entries: list[IndexEntry]

    def __len__(self) -> int:
        return len(self.entries)


def word_vector(model: EmbeddingModel, word: str) -> np.ndarray:
    """Compose a word's vector from whole-word and subword bucket vectors.

    In-vocabulary words average their whole-word vector with their n-gram
    bucket vectors; OOV words average the bucket vectors alone. Words whose
    wrapped form is shorter than ngram_min get the zero vector.
    """
    ids = model.subword_ids(word)
    entry = model.vocab.get(word)
    if entry is not None:
        parts = model.input_bucket_vectors[ids].sum(axis=0) + model.input_word_vectors[entry[0]]
        return (parts / (len(ids) + 1)).astype(np.float32)
    if len(ids) == 0:
        return np.zeros(model.dim, dtype=np.float32)
    return model.input_bucket_vectors[ids].mean(axis=0).astype(np.float32)


def sentence_vector(model: EmbeddingModel, tokens: list[str] | tuple[str, ...]) -> np.ndarray:
    """Component-wise mean of the tokens' word vectors; zero for no tokens."""
    if not tokens:
        return np.zeros(model.dim, dtype=np.float32)
    acc = np.zeros(model.dim, dtype=np.float32)
    for tok in tokens:
        acc += word_vector(model, tok)
    return acc / np.float32(len(tokens))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # log(sigmoid(x)) computed stably for large |x|
    return np.where(x >= 0, -np.log1p(np.exp(-x)), x - np.log1p(np.exp(x)))


def skipgram_loss(center_repr, context_index, negative_indices, output_vectors) -> float:
    """Negative-sampling loss for one (center, context) pair, no updates."""
    h = np.asarray(center_repr, dtype=np.float64)
    u_c = np.asarray(output_vectors[context_index], dtype=np.float64)
    loss = -float(_log_sigmoid(np.dot(u_c, h)))
    for ni in negative_indices:
        u_n = np.asarray(output_vectors[ni], dtype=np.float64)
        loss -= float(_log_sigmoid(-np.dot(u_n, h)))
    return loss


def skipgram_gradients(center_repr, context_index, negative_indices, output_vectors):
    """Loss plus analytic gradients w.r.t. the center representation and the
    touched output rows. Returns (loss, grad_center, indices, grad_rows)."""
    h = np.asarray(center_repr)
    idx = np.concatenate(([context_index], np.asarray(negative_indices, dtype=np.int64)))
    u = output_vectors[idx]
    s = u @ h
    signs = np.ones(len(idx))
    signs[1:] = -1.0
    loss = -float(_log_sigmoid(signs * s).sum())
    # d loss / d s_i = sigmoid(s_i) - label_i
    g = 1.0 / (1.0 + np.exp(-s))
    g[0] -= 1.0
    grad_center = g @ u
    grad_rows = np.outer(g, h)
    return loss, grad_center, idx, grad_rows


def skipgram_step(center_repr, context_index, negative_indices, output_vectors, lr,
                  contributors=None):
    """One SGD step on a (center, context-with-negatives) pair.

    Updates the context and negative output rows in place. If ``contributors``
    is given as a list of (matrix, row_indices) pairs naming every input row
    that contributed to ``center_repr``, each such row receives the center
    gradient split equally among all contributing rows. Returns
    (loss, grad_center).
    """
    loss, grad_center, idx, grad_rows = skipgram_gradients(
        center_repr, context_index, negative_indices, output_vectors)
    np.subtract.at(output_vectors, idx, (lr * grad_rows).astype(output_vectors.dtype))
    if contributors:
        total = sum(np.size(rows) for _, rows in contributors)
        step = (lr / total) * grad_center
        for matrix, rows in contributors:
            np.subtract.at(matrix, rows, step.astype(matrix.dtype))
    return loss, grad_center


def _build_vocab(corpus: Corpus, min_count: int) -> dict[str, tuple[int, int]]:
    counts: dict[str, int] = {}
    for sent in corpus.sentences:
        for tok in sent.tokens:
            counts[tok] = counts.get(tok, 0) + 1
    vocab: dict[str, tuple[int, int]] = {}
    for word, count in counts.items():  # insertion order = first appearance
        if count >= min_count:
            vocab[word] = (len(vocab), count)
    return vocab


def train(corpus: Corpus, hp: Hyperparams,
          epoch_losses: list[float] | None = None) -> EmbeddingModel:
    """Train a subword skip-gram model with negative sampling.

    Deterministic for a given (corpus, hp): a single seeded PRNG drives
    initialization, window sampling, subsampling, and negative draws, and
    training is single-threaded. If ``epoch_losses`` is passed, the mean
    pair loss of each epoch is appended to it.
    """
    if corpus.token_count == 0:
        raise TrainingError("corpus has no tokens")
    vocab = _build_vocab(corpus, hp.min_count)
    if not vocab:
        raise TrainingError("vocabulary is empty after min_count filtering")

    rng = np.random.default_rng(hp.seed)
    n_words = len(vocab)
    scale = np.float32(1.0 / hp.dim)
    input_word = (rng.random((n_words, hp.dim), dtype=np.float32) * 2 - 1) * scale
    input_bucket = (rng.random((hp.buckets, hp.dim), dtype=np.float32) * 2 - 1) * scale
    output = np.zeros((n_words, hp.dim), dtype=np.float32)

    model = EmbeddingModel(hp, vocab, input_word, input_bucket, output)

    # Per-word subword bucket ids, precomputed once.
    words = list(vocab)
    sub_ids = [model.subword_ids(w) for w in words]

    counts = np.array([vocab[w][1] for w in words], dtype=np.float64)
    total_count = counts.sum()

    # Negative sampling from the unigram^0.75 distribution.
    neg_probs = counts ** 0.75
    neg_cum = np.cumsum(neg_probs / neg_probs.sum())

    # Frequent-word subsampling keep probability.
    if hp.subsample_t > 0:
        freqs = counts / total_count
        keep_prob = np.minimum(1.0, np.sqrt(hp.subsample_t / freqs) + hp.subsample_t / freqs)
    else:
        keep_prob = np.ones(n_words)

    sent_ids = [
        np.array([vocab[t][0] for t in sent.tokens if t in vocab], dtype=np.int64)
        for sent in corpus.sentences
    ]

    total_tokens = hp.epochs * corpus.token_count
    lr_floor = hp.lr0 * 1e-4
    processed = 0
    n_neg = hp.negatives

    for _ in range(hp.epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for ids in sent_ids:
            processed += len(ids)
            if len(ids) == 0:
                continue
            if hp.subsample_t > 0:
                kept = ids[rng.random(len(ids)) < keep_prob[ids]]
            else:
                kept = ids
            n = len(kept)
            if n < 2:
                continue
            lr = max(lr_floor, hp.lr0 * (1.0 - processed / total_tokens))
            offsets = rng.integers(1, hp.window + 1, size=n)
            for i in range(n):
                center = kept[i]
                b = offsets[i]
                ctx = np.concatenate((kept[max(0, i - b):i], kept[i + 1:i + b + 1]))
                if len(ctx) == 0:
                    continue
                buckets = sub_ids[center]
                h = (input_bucket[buckets].sum(axis=0) + input_word[center]) / np.float32(len(buckets) + 1)
                grad_h = np.zeros(hp.dim, dtype=np.float64)
                for c in ctx:
                    negs = np.searchsorted(neg_cum, rng.random(n_neg))
                    while True:
                        bad = negs == c
                        if not bad.any():
                            break
                        negs[bad] = np.searchsorted(neg_cum, rng.random(int(bad.sum())))
                    loss, g, idx, grad_rows = skipgram_gradients(h, c, negs, output)
                    np.subtract.at(output, idx, (lr * grad_rows).astype(np.float32))
                    grad_h += g
                    epoch_loss += loss
                    epoch_pairs += 1
                step = (lr / (len(buckets) + 1)) * grad_h
                step32 = step.astype(np.float32)
                input_word[center] -= step32
                np.subtract.at(input_bucket, buckets, step32)
        if epoch_losses is not None:
            epoch_losses.append(epoch_loss / epoch_pairs if epoch_pairs else 0.0)

    model._subword_cache.clear()
    return model


def build_index(model: EmbeddingModel, corpus: Corpus) -> SentenceIndex:
    """Precompute one sentence vector per corpus sentence, in id order."""
    entries = [
        IndexEntry(sent.id, sent.text, sentence_vector(model, sent.tokens))
        for sent in corpus.sentences
    ]
    return SentenceIndex(dim=model.dim, entries=entries)


# ---------------------------------------------------------------------------
# Binary persistence. All integers little-endian; vectors are float32
# row-major. Model layout: magic, version u32, hyperparameters, vocab,
# then the three matrices. Index layout: magic, version u32, dim u32,
# entry count u64, then per entry (id u64, text, dim floats).
# ---------------------------------------------------------------------------

_HP_STRUCT = struct.Struct("<IIIIdIIQId Q")


def _write_str(fh, s: str) -> None:
    data = s.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


class _Reader:
    def __init__(self, fh, what: str):
        self.fh = fh
        self.what = what

    def read(self, n: int, fieldname: str) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise FormatError(f"{self.what}: truncated while reading {fieldname}")
        return data

    def unpack(self, fmt: str, fieldname: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.read(size, fieldname))

    def read_str(self, fieldname: str) -> str:
        (length,) = self.unpack("<I", fieldname + " length")
        return self.read(length, fieldname).decode("utf-8")

    def read_matrix(self, rows: int, cols: int, fieldname: str) -> np.ndarray:
        data = self.read(rows * cols * 4, fieldname)
        return np.frombuffer(data, dtype="<f4").reshape(rows, cols).copy()


def save_model(model: EmbeddingModel, path: str) -> None:
    hp = model.hyperparams
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(_HP_STRUCT.pack(hp.dim, hp.window, hp.negatives, hp.epochs, hp.lr0,
                                 hp.ngram_min, hp.ngram_max, hp.buckets, hp.min_count,
                                 hp.subsample_t, hp.seed))
        fh.write(struct.pack("<Q", len(model.vocab)))
        # words written in index order so the position encodes the index
        for word, (_, count) in sorted(model.vocab.items(), key=lambda kv: kv[1][0]):
            _write_str(fh, word)
            fh.write(struct.pack("<Q", count))
        for matrix in (model.input_word_vectors, model.input_bucket_vectors,
                       model.output_vectors):
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def load_model(path: str) -> EmbeddingModel:
    with open(path, "rb") as fh:
        r = _Reader(fh, "model file")
        if r.read(len(MODEL_MAGIC), "magic") != MODEL_MAGIC:
            raise FormatError("model file: bad magic")
        (version,) = r.unpack("<I", "format version")
        if version != FORMAT_VERSION:
            raise FormatError(f"model file: unsupported format version {version}")
        fields = r.unpack(_HP_STRUCT.format, "hyperparameters")
        hp = Hyperparams(dim=fields[0], window=fields[1], negatives=fields[2],
                         epochs=fields[3], lr0=fields[4], ngram_min=fields[5],
                         ngram_max=fields[6], buckets=fields[7], min_count=fields[8],
                         subsample_t=fields[9], seed=fields[10])
        (n_words,) = r.unpack("<Q", "vocab count")
        vocab: dict[str, tuple[int, int]] = {}
        for i in range(n_words):
            word = r.read_str(f"vocab word {i}")
            (count,) = r.unpack("<Q", f"vocab count {i}")
            vocab[word] = (i, count)
        input_word = r.read_matrix(n_words, hp.dim, "input word vectors")
        input_bucket = r.read_matrix(hp.buckets, hp.dim, "input bucket vectors")
        output = r.read_matrix(n_words, hp.dim, "output vectors")
        if fh.read(1):
            raise FormatError("model file: trailing bytes after output vectors")
    return EmbeddingModel(hp, vocab, input_word, input_bucket, output)


def save_index(index: SentenceIndex, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<IIQ", FORMAT_VERSION, index.dim, len(index.entries)))
        for entry in index.entries:
            fh.write(struct.pack("<Q", entry.sentence_id))
            _write_str(fh, entry.text)
            vec = np.asarray(entry.vector, dtype="<f4")
            if vec.shape != (index.dim,):
                raise FormatError(
                    f"index entry {entry.sentence_id}: vector length {vec.shape} != dim {index.dim}")
            fh.write(vec.tobytes())


def load_index(path: str) -> SentenceIndex:
    with open(path, "rb") as fh:
        r = _Reader(fh, "index file")
        if r.read(len(INDEX_MAGIC), "magic") != INDEX_MAGIC:
            raise FormatError("index file: bad magic")
        version, dim, count = r.unpack("<IIQ", "header")
        if version != FORMAT_VERSION:
            raise FormatError(f"index file: unsupported format version {version}")
        entries: list[IndexEntry] = []
        prev_id = -1
        for i in range(count):
            (sid,) = r.unpack("<Q", f"entry {i} id")
            text = r.read_str(f"entry {i} text")
            vec = np.frombuffer(r.read(dim * 4, f"entry {i} vector"), dtype="<f4").copy()
            if sid <= prev_id:
                raise FormatError(f"index file: entry ids not strictly increasing at {sid}")
            prev_id = sid
            entries.append(IndexEntry(int(sid), text, vec))
        if fh.read(1):
            raise FormatError("index file: trailing bytes after entries")
    return SentenceIndex(dim=dim, entries=entries)
