"""Build a labeled 20 Newsgroups subsample in the engine's corpus format.

The engine requires single-token class names, so the newsgroup names are
mapped to one-word labels. Text is reduced to clean ASCII with bounded word
length and document length: that keeps every remaining word inside the
encoder's window and decomposable into sub-word pieces, so the exported table
covers the corpus vocabulary.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .words import tokenize

__all__ = ["GROUP_LABELS", "fetch_20news_subset"]

GROUP_LABELS = {
    "alt.atheism": "atheism",
    "comp.graphics": "graphics",
    "comp.os.ms-windows.misc": "windows",
    "comp.sys.ibm.pc.hardware": "ibm",
    "comp.sys.mac.hardware": "mac",
    "comp.windows.x": "xwindows",
    "misc.forsale": "forsale",
    "rec.autos": "autos",
    "rec.motorcycles": "motorcycles",
    "rec.sport.baseball": "baseball",
    "rec.sport.hockey": "hockey",
    "sci.crypt": "cryptography",
    "sci.electronics": "electronics",
    "sci.med": "medicine",
    "sci.space": "space",
    "soc.religion.christian": "christian",
    "talk.politics.guns": "guns",
    "talk.politics.mideast": "mideast",
    "talk.politics.misc": "politics",
    "talk.religion.misc": "religion",
}

_MIN_WORDS = 5


def _clean_text(text: str, max_words: int, max_word_chars: int) -> str:
    ascii_text = text.encode("ascii", "ignore").decode("ascii")
    kept = [w for w in ascii_text.split() if len(w) <= max_word_chars]
    return " ".join(kept[:max_words])


def fetch_20news_subset(
    out_path: str | Path,
    per_class: int = 100,
    seed: int = 0,
    data_home: str | None = None,
    max_words: int = 256,
    max_word_chars: int = 30,
) -> Path:
    """Write a stratified JSONL subsample (`per_class` documents per group).

    Headers, footers and quoted replies are stripped before sampling, and
    documents with fewer than five usable words are excluded from the pool.
    Raises ValueError when the dataset cannot be loaded (e.g. no local copy
    and no network) or a group has too few usable documents.
    """
    from sklearn.datasets import fetch_20newsgroups

    try:
        bundle = fetch_20newsgroups(
            subset="train",
            remove=("headers", "footers", "quotes"),
            shuffle=False,
            data_home=data_home,
        )
    except Exception as exc:  # sklearn raises various network/IO errors
        raise ValueError(
            f"20 Newsgroups data is unavailable (no local copy and download failed): {exc}"
        ) from exc

    by_label: dict[str, list[str]] = {label: [] for label in GROUP_LABELS.values()}
    for text, target in zip(bundle.data, bundle.target):
        label = GROUP_LABELS[bundle.target_names[target]]
        cleaned = _clean_text(text, max_words, max_word_chars)
        if len(tokenize(cleaned)) >= _MIN_WORDS:
            by_label[label].append(cleaned)

    rng = random.Random(seed)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as fh:
        for label in sorted(by_label):
            pool = by_label[label]
            if len(pool) < per_class:
                raise ValueError(
                    f"group {label!r} has only {len(pool)} usable documents, "
                    f"need {per_class}"
                )
            picks = sorted(rng.sample(range(len(pool)), per_class))
            for n, idx in enumerate(picks):
                row = {"id": f"{label}-{n:04d}", "text": pool[idx], "label": label}
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return out_path
