"""Built-in English stopword list used when selecting candidate class-words."""

from __future__ import annotations

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

__all__ = ["STOPWORDS", "is_stopword"]

STOPWORDS: frozenset[str] = frozenset(ENGLISH_STOP_WORDS)


def is_stopword(word: str) -> bool:
    return word in STOPWORDS
