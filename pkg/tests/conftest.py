import numpy as np
import pytest

from corpusloop.corpus import load_corpus
from corpusloop.embeddings import Hyperparams, build_index, train

TINY_HP = Hyperparams(dim=8, window=3, negatives=3, epochs=2, buckets=200, seed=11)

TINY_LINES = [
    "ceese' he'ihneestoyoohobee hinii3ebio",
    "ceese' hookuhu'eeno he'ihce'ciiciinen",
    "ceese' nuhu' hinono'ei",
    "he'ih'iixoo niiinon hee3ebiihi'",
    "wo'ei3 nuhu' ceese' hinee",
    "nuhu' he'ihce'ciiciinen hinee niiinon",
    "hinono'ei niiinon hinee wo'ei3",
    "he'ihneestoyoohobee nuhu' hee3ebiihi'",
]


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "tiny.txt"
    path.write_text("\n".join(TINY_LINES) + "\n", encoding="utf-8")
    return load_corpus(str(path))


@pytest.fixture(scope="session")
def tiny_model(tiny_corpus):
    return train(tiny_corpus, TINY_HP)


@pytest.fixture(scope="session")
def tiny_index(tiny_model, tiny_corpus):
    return build_index(tiny_model, tiny_corpus)


def make_random_index(n_sentences: int, dim: int, seed: int):
    """A toy index of random unit-scale vectors with synthetic texts."""
    from corpusloop.embeddings import IndexEntry, SentenceIndex

    rng = np.random.default_rng(seed)
    words = ["niiinon", "ceese'", "hinee", "nuhu'", "he'ih", "wo'ei3", "hinono'ei"]
    entries = []
    for i in range(n_sentences):
        vec = rng.normal(size=dim).astype(np.float32)
        text = " ".join(rng.choice(words, size=rng.integers(2, 6)))
        entries.append(IndexEntry(i, text, vec))
    return SentenceIndex(dim=dim, entries=entries)
