"""English text analysis: tokenize, lowercase, drop stopwords, Porter-stem."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from nltk.stem.porter import PorterStemmer

_POSSESSIVE = re.compile(r"['’][sS]\b")
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=None)
def stem(word: str) -> str:
    return _stemmer.stem(word, to_lowercase=False)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stopword list (one word per line). ``None`` gives the bundled list."""
    if path is None:
        text = resources.files("qppconf").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


DEFAULT_STOPWORDS = load_stopwords()


class Analyzer:
    def __init__(self, stopwords: Iterable[str] | None = None):
        self.stopwords = DEFAULT_STOPWORDS if stopwords is None else frozenset(stopwords)

    def __call__(self, text: str | bytes) -> list[str]:
        return analyze(text, self.stopwords)


@lru_cache(maxsize=8)
def _term_table(stopwords: frozenset[str]) -> dict[str, str]:
    # token -> analyzed term, "" for dropped tokens; grows as tokens are seen
    return {}


def analyze(text: str | bytes, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Return analyzed terms of ``text``.

    Possessive ``'s`` is dropped before splitting so "IBM's" yields "ibm".
    Bytes are decoded as UTF-8 with invalid sequences replaced.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    stopwords = frozenset(stopwords)
    table = _term_table(stopwords)
    tokens = _TOKEN.findall(_POSSESSIVE.sub("", text).lower())
    mapped = list(map(table.get, tokens))
    if None in mapped:
        for token in tokens:
            if token not in table:
                term = "" if token in stopwords else stem(token)
                table[token] = "" if term in stopwords else term
        mapped = list(map(table.get, tokens))
    return list(filter(None, mapped))
