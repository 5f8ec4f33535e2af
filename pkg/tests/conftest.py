"""Shared fixtures: synthetic corpora with planted topic structure."""

from __future__ import annotations

import random

import pytest

from openclass.corpus import Corpus, Document

TOPIC_NAMES = [
    "archery",
    "botany",
    "circuits",
    "dialects",
    "eclipse",
    "fossils",
    "glaciers",
    "harvest",
]

FILLER_WORDS = [
    "report",
    "today",
    "group",
    "people",
    "ideas",
    "information",
    "question",
    "problem",
    "course",
    "research",
    "update",
    "weekly",
    "meeting",
    "notes",
    "summary",
    "public",
    "general",
    "local",
    "recent",
    "review",
    "project",
    "member",
    "level",
    "event",
    "detail",
]


def topic_keywords(name: str, n: int = 15) -> list[str]:
    return [f"{name}{chr(ord('a') + i)}" for i in range(n)]


def make_planted_corpus(
    n_topics: int = 8,
    docs_per_topic: int = 150,
    seed: int = 0,
    doc_len: tuple[int, int] = (25, 40),
    topic_token_prob: float = 0.65,
    name_prob_within_topic: float = 0.2,
    n_keywords: int = 15,
    topic_names: list[str] | None = None,
    fillers: list[str] | None = None,
) -> Corpus:
    """Corpus with topic-exclusive keyword distributions plus shared fillers."""
    names = (topic_names or TOPIC_NAMES)[:n_topics]
    if len(names) < n_topics:
        raise ValueError("not enough topic names")
    fillers = fillers or FILLER_WORDS
    rng = random.Random(seed)
    docs: list[Document] = []
    for t, name in enumerate(names):
        keywords = topic_keywords(name, n_keywords)
        for i in range(docs_per_topic):
            length = rng.randint(*doc_len)
            tokens: list[str] = []
            for _ in range(length):
                if rng.random() < topic_token_prob:
                    if rng.random() < name_prob_within_topic:
                        tokens.append(name)
                    else:
                        # Mild Zipf tilt so each topic has clear head words.
                        r = min(
                            int(rng.expovariate(1.0 / (n_keywords / 4.0))),
                            n_keywords - 1,
                        )
                        tokens.append(keywords[r])
                else:
                    tokens.append(rng.choice(fillers))
            docs.append(
                Document(
                    id=f"d{t:02d}{i:04d}",
                    raw_text=" ".join(tokens),
                    tokens=tuple(tokens),
                    gold_label=name,
                )
            )
    return Corpus.from_documents(docs)


@pytest.fixture(scope="session")
def planted_corpus() -> Corpus:
    return make_planted_corpus()
