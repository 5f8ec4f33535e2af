"""Corpus loading, tokenization, vocabulary statistics and supervision splits."""

from __future__ import annotations

import json
import math
import random
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "Document",
    "VocabEntry",
    "Corpus",
    "Supervision",
    "tokenize",
    "normalize_class_name",
    "load_corpus",
    "make_open_world_split",
    "make_imbalanced",
    "save_supervision",
    "load_supervision",
]

# Unicode alphanumeric runs, underscore excluded.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase `text` and split it into word tokens.

    Tokens are maximal alphanumeric runs; single-character tokens and pure
    digit strings are discarded.
    """
    return [t for t in _WORD_RE.findall(text.lower()) if len(t) > 1 and not t.isdigit()]


def normalize_class_name(label: str) -> str:
    """Reduce a class label to a single vocabulary word.

    Raises ValueError if the label does not normalize to exactly one token.
    """
    toks = tokenize(label)
    if len(toks) != 1:
        raise ValueError(
            f"class label {label!r} does not normalize to a single word "
            f"(got {toks!r}); rename the class to a one-word label"
        )
    return toks[0]


@dataclass(frozen=True)
class Document:
    """One text document, tokenized once at load time."""

    id: str
    raw_text: str
    tokens: tuple[str, ...]
    gold_label: str | None = None


@dataclass(frozen=True)
class VocabEntry:
    """Corpus-level counts for one word."""

    total_count: int
    doc_freq: int


@dataclass
class Corpus:
    """A fixed collection of documents plus derived vocabulary statistics."""

    documents: list[Document]
    vocab: dict[str, VocabEntry] = field(repr=False)
    _by_id: dict[str, Document] = field(repr=False)

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        docs = list(documents)
        if not docs:
            raise ValueError("corpus is empty: no documents with at least one token")
        by_id: dict[str, Document] = {}
        totals: Counter[str] = Counter()
        doc_freq: Counter[str] = Counter()
        for doc in docs:
            if doc.id in by_id:
                raise ValueError(f"duplicate document id {doc.id!r}")
            if not doc.tokens:
                raise ValueError(f"document {doc.id!r} has no tokens")
            by_id[doc.id] = doc
            totals.update(doc.tokens)
            doc_freq.update(set(doc.tokens))
        vocab = {
            w: VocabEntry(total_count=totals[w], doc_freq=doc_freq[w]) for w in totals
        }
        return cls(documents=docs, vocab=vocab, _by_id=by_id)

    @property
    def num_docs(self) -> int:
        return len(self.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise KeyError(f"unknown document id {doc_id!r}") from None

    def require_labels(self) -> None:
        missing = [d.id for d in self.documents if d.gold_label is None]
        if missing:
            raise ValueError(
                f"{len(missing)} document(s) have no gold label "
                f"(first offenders: {missing[:5]})"
            )

    def class_counts(self) -> dict[str, int]:
        self.require_labels()
        return dict(Counter(d.gold_label for d in self.documents))

    def doc_ids_by_class(self) -> dict[str, list[str]]:
        self.require_labels()
        out: dict[str, list[str]] = {}
        for d in self.documents:
            out.setdefault(d.gold_label, []).append(d.id)
        return out


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus: one object per line with `id`, `text`, optional `label`.

    Documents that tokenize to nothing are dropped with a warning; parse and
    schema errors name the offending line.
    """
    path = Path(path)
    docs: list[Document] = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: malformed JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise ValueError(f"{path}: line {lineno}: expected a JSON object")
            doc_id = obj.get("id")
            text = obj.get("text")
            label = obj.get("label")
            if not isinstance(doc_id, str) or not doc_id:
                raise ValueError(f"{path}: line {lineno}: missing or non-string 'id'")
            if not isinstance(text, str):
                raise ValueError(f"{path}: line {lineno}: missing or non-string 'text'")
            if label is not None and not isinstance(label, str):
                raise ValueError(f"{path}: line {lineno}: 'label' must be a string")
            if doc_id in seen_ids:
                raise ValueError(f"{path}: line {lineno}: duplicate document id {doc_id!r}")
            seen_ids.add(doc_id)
            tokens = tuple(tokenize(text))
            if not tokens:
                warnings.warn(
                    f"{path}: line {lineno}: document {doc_id!r} has no tokens after "
                    f"tokenization; dropped",
                    stacklevel=2,
                )
                continue
            docs.append(Document(id=doc_id, raw_text=text, tokens=tokens, gold_label=label))
    if not docs:
        raise ValueError(f"{path}: corpus is empty")
    return Corpus.from_documents(docs)


@dataclass
class Supervision:
    """Few-shot supervision: which classes are seen, and their labeled examples.

    `seen_class_names` holds the normalized one-word class names, parallel to
    the keys of `labeled_examples` (which are the original class labels).
    """

    seen_class_names: list[str]
    labeled_examples: dict[str, list[str]]
    shots_per_class: int

    @property
    def seen_labels(self) -> list[str]:
        return list(self.labeled_examples.keys())

    @property
    def name_by_label(self) -> dict[str, str]:
        return dict(zip(self.labeled_examples.keys(), self.seen_class_names))

    @property
    def label_by_name(self) -> dict[str, str]:
        return {n: l for l, n in self.name_by_label.items()}

    def all_labeled_doc_ids(self) -> list[str]:
        out: list[str] = []
        for ids in self.labeled_examples.values():
            out.extend(ids)
        return out

    def validate(self, corpus: Corpus) -> None:
        if not self.seen_class_names:
            raise ValueError("supervision lists no seen classes")
        if len(self.seen_class_names) != len(self.labeled_examples):
            raise ValueError(
                "seen_class_names and labeled_examples disagree on the number "
                "of seen classes"
            )
        if len(set(self.seen_class_names)) != len(self.seen_class_names):
            raise ValueError(f"duplicate seen class names: {self.seen_class_names}")
        for name in self.seen_class_names:
            if normalize_class_name(name) != name:
                raise ValueError(f"seen class name {name!r} is not a normalized word")
        seen_ids: set[str] = set()
        for label, ids in self.labeled_examples.items():
            if len(ids) != self.shots_per_class:
                raise ValueError(
                    f"class {label!r} has {len(ids)} labeled examples, "
                    f"expected {self.shots_per_class}"
                )
            for doc_id in ids:
                if doc_id not in corpus:
                    raise ValueError(f"labeled document {doc_id!r} not in corpus")
                if doc_id in seen_ids:
                    raise ValueError(f"document {doc_id!r} labeled for more than one class")
                seen_ids.add(doc_id)
                gold = corpus.get(doc_id).gold_label
                if gold is not None and gold != label:
                    raise ValueError(
                        f"labeled document {doc_id!r} carries gold label {gold!r}, "
                        f"but supervision assigns it to {label!r}"
                    )


def make_open_world_split(
    corpus: Corpus,
    seen_fraction: float = 0.5,
    shots: int = 10,
    seed: int = 42,
) -> Supervision:
    """Mark the most frequent classes as seen and sample labeled shots for them.

    Classes are ordered by descending document count, ties broken by ascending
    class label; the first ceil(seen_fraction * n_classes) become seen. For
    each seen class exactly `shots` documents are sampled reproducibly.
    """
    if not 0.0 < seen_fraction <= 1.0:
        raise ValueError(f"seen_fraction must be in (0, 1], got {seen_fraction}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    by_class = corpus.doc_ids_by_class()
    order = sorted(by_class, key=lambda c: (-len(by_class[c]), c))
    n_seen = math.ceil(seen_fraction * len(order))
    seen = order[:n_seen]
    too_small = [c for c in seen if len(by_class[c]) < shots]
    if too_small:
        raise ValueError(
            f"cannot sample {shots} shots: seen class(es) {too_small} have fewer documents"
        )
    names = [normalize_class_name(c) for c in seen]
    if len(set(names)) != len(names):
        raise ValueError(f"seen class labels normalize to duplicate names: {names}")
    rng = random.Random(seed)
    labeled: dict[str, list[str]] = {}
    for cls in seen:
        ids = sorted(by_class[cls])
        labeled[cls] = sorted(rng.sample(ids, shots))
    return Supervision(
        seen_class_names=names, labeled_examples=labeled, shots_per_class=shots
    )


def make_imbalanced(corpus: Corpus, delta: float, class_order_seed: int = 7) -> Corpus:
    """Thin classes linearly: class k in a seeded shuffle keeps floor((1 - k*delta) * n_k) docs.

    Original document order is preserved. Errors if the retention ratio drops
    to zero or below for any class.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    by_class = corpus.doc_ids_by_class()
    order = sorted(by_class)
    rng = random.Random(class_order_seed)
    rng.shuffle(order)
    keep: set[str] = set()
    for k, cls in enumerate(order):
        ratio = 1.0 - k * delta
        if ratio <= 0:
            raise ValueError(
                f"delta={delta} drives class {cls!r} (position {k}) to a "
                f"non-positive retention ratio; use a smaller delta"
            )
        ids = sorted(by_class[cls])
        n_keep = math.floor(ratio * len(ids))
        keep.update(rng.sample(ids, n_keep))
    kept_docs = [d for d in corpus.documents if d.id in keep]
    return Corpus.from_documents(kept_docs)


def save_supervision(supervision: Supervision, path: str | Path) -> None:
    payload = {
        "seen_class_names": supervision.seen_class_names,
        "labeled_examples": supervision.labeled_examples,
        "shots_per_class": supervision.shots_per_class,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def load_supervision(path: str | Path) -> Supervision:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed supervision JSON: {exc}") from None
    try:
        names = list(payload["seen_class_names"])
        labeled = {str(k): list(v) for k, v in payload["labeled_examples"].items()}
        shots = int(payload["shots_per_class"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"{path}: supervision JSON missing required fields: {exc}") from None
    return Supervision(seen_class_names=names, labeled_examples=labeled, shots_per_class=shots)
