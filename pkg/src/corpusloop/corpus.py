"""Corpus loading and tokenization.

A corpus is a UTF-8 plain-text file with one sentence per line. Blank lines
are skipped. Sentence ids are 0-based positions among the non-blank lines,
so they are stable across reloads of the same file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Only these characters are ever stripped from token edges. Apostrophes are
# deliberately absent: they are orthographic in many language communities'
# writing systems (e.g. Arapaho ceese', he'ih) and must survive tokenization.
_STRIPPABLE = '.,;:!?"()[]'


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = False
    strip_punctuation: bool = False


@dataclass(frozen=True)
class Sentence:
    id: int
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    token_count: int
    source_path: str = ""

    def __len__(self) -> int:
        return len(self.sentences)


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Split ``text`` on Unicode whitespace into non-empty tokens.

    With ``lowercase`` set, tokens are Unicode-lowercased. With
    ``strip_punctuation`` set, leading/trailing characters from a small
    punctuation set are removed (never apostrophes). Tokens that become
    empty after stripping are dropped.
    """
    tokens = text.split()
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.strip_punctuation:
        tokens = [t.strip(_STRIPPABLE) for t in tokens]
        tokens = [t for t in tokens if t]
    return tokens


def load_corpus(path: str, config: TokenizerConfig = TokenizerConfig()) -> Corpus:
    """Load a one-sentence-per-line UTF-8 file into a Corpus.

    Blank (whitespace-only) lines are skipped, not stored. Raises OSError on
    unreadable files and UnicodeDecodeError (which carries the byte offset)
    on invalid UTF-8.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")

    sentences: list[Sentence] = []
    token_count = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        tokens = tuple(tokenize(line, config))
        sentences.append(Sentence(id=len(sentences), text=line, tokens=tokens))
        token_count += len(tokens)
    return Corpus(sentences=tuple(sentences), token_count=token_count, source_path=str(path))
