"""Corpus reading and the word tokenization rule shared with the engine.

The engine consumes JSON Lines corpora and tokenizes text into lowercase
alphanumeric runs (underscore excluded), dropping single characters and pure
digit strings. The exporter mirrors that rule so the exported vocabulary
covers exactly the words the engine will look up.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

__all__ = ["RawDocument", "load_documents", "word_spans", "tokenize"]

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _usable(token: str) -> bool:
    return len(token) > 1 and not token.isdigit()


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens of `text`, same rule as the engine."""
    return [t for t in _WORD_RE.findall(text.lower()) if _usable(t)]


def word_spans(text: str) -> list[tuple[int, int, str]]:
    """(start, end, lowercased token) for every usable word occurrence."""
    out: list[tuple[int, int, str]] = []
    for m in _WORD_RE.finditer(text):
        token = m.group().lower()
        if _usable(token):
            out.append((m.start(), m.end(), token))
    return out


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str


def load_documents(path: str | Path) -> list[RawDocument]:
    """Read a JSONL corpus: one `{"id": ..., "text": ...}` object per line.

    Extra fields (such as `label`) are ignored. Duplicate ids and schema
    violations raise with the offending line number.
    """
    path = Path(path)
    docs: list[RawDocument] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise ValueError(
                    f"{path}: line {lineno}: expected an object with 'id' and 'text'"
                )
            doc_id = str(obj["id"])
            if doc_id in seen:
                raise ValueError(f"{path}: line {lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            docs.append(RawDocument(id=doc_id, text=str(obj["text"])))
    if not docs:
        raise ValueError(f"{path}: no documents found")
    return docs
