"""Candidate class-word mining.

Two sources feed the candidate pool: words similar to the seed class names in
embedding space, and words statistically representative of individual document
clusters (frequent inside, concentrated, rare outside).
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .embedding import EmbeddingTable
from .stopwords import STOPWORDS

__all__ = [
    "RepWordScore",
    "CandidateSet",
    "ClusterTermStats",
    "cluster_term_stats",
    "representativeness",
    "top_representative_words",
    "expand_seeds",
    "merge_candidates",
]


@dataclass(frozen=True)
class RepWordScore:
    """A word's representativeness score within one cluster."""

    word: str
    cluster_id: str
    score: float


@dataclass
class CandidateSet:
    """Deduplicated candidate class-words with their origins.

    `origin[word]` is a subset of {"expansion", "statistical"}.
    """

    words: list[str]
    origin: dict[str, set[str]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.origin


@dataclass
class ClusterTermStats:
    """Per-cluster term counts backing the representativeness score."""

    cluster_id: str
    size: int
    doc_count: Counter
    occ_count: Counter


def cluster_term_stats(
    corpus: Corpus, cluster_id: str, member_doc_ids: Iterable[str]
) -> ClusterTermStats:
    doc_count: Counter[str] = Counter()
    occ_count: Counter[str] = Counter()
    size = 0
    for doc_id in member_doc_ids:
        doc = corpus.get(doc_id)
        size += 1
        occ_count.update(doc.tokens)
        doc_count.update(set(doc.tokens))
    if size == 0:
        raise ValueError(f"cluster {cluster_id!r} has no member documents")
    return ClusterTermStats(
        cluster_id=cluster_id, size=size, doc_count=doc_count, occ_count=occ_count
    )


def representativeness(word: str, stats: ClusterTermStats, corpus: Corpus) -> float:
    """How strongly `word` characterizes the cluster.

    Combines the in-cluster document ratio, a saturating occurrence-rate term,
    and an inverse document frequency factor (natural log). Zero when the word
    does not appear in the cluster.
    """
    entry = corpus.vocab.get(word)
    if entry is None:
        raise ValueError(f"word {word!r} is not in the corpus vocabulary")
    s_i = stats.doc_count.get(word, 0)
    if s_i == 0:
        return 0.0
    t_i = stats.occ_count[word]
    idf = math.log(corpus.num_docs / entry.doc_freq)
    return (s_i / stats.size) * math.tanh(t_i / stats.size) * idf


def top_representative_words(
    stats: ClusterTermStats, corpus: Corpus, n: int
) -> list[RepWordScore]:
    """The `n` highest-scoring non-stopword terms of a cluster.

    Ties break toward the higher raw occurrence count, then the
    lexicographically smaller word.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scored = []
    for word in stats.doc_count:
        if word in STOPWORDS:
            continue
        score = representativeness(word, stats, corpus)
        scored.append((-score, -stats.occ_count[word], word))
    scored.sort()
    return [
        RepWordScore(word=w, cluster_id=stats.cluster_id, score=-neg_score)
        for neg_score, _, w in scored[:n]
    ]


def expand_seeds(
    seed_names: Sequence[str],
    table: EmbeddingTable,
    k_total: int,
    vocab: Mapping[str, object] | None = None,
) -> list[str]:
    """Grow the seed class names to `k_total` names total.

    Returns the k_total - len(seeds) non-seed, non-stopword words with the
    highest mean cosine similarity to the seed vectors, in descending score
    order (ties: lexicographically smaller word first). The seeds themselves
    are not returned.
    """
    seeds = list(dict.fromkeys(seed_names))
    if not seeds:
        raise ValueError("no seed names given")
    if k_total < len(seeds):
        raise ValueError(
            f"k_total={k_total} is smaller than the number of seeds ({len(seeds)})"
        )
    in_table = [s for s in seeds if s in table]
    skipped = [s for s in seeds if s not in table]
    if skipped:
        warnings.warn(
            f"seed name(s) missing from embedding table, skipped for expansion: {skipped}",
            stacklevel=2,
        )
    if not in_table:
        raise ValueError("none of the seed names are in the embedding table")
    n_new = k_total - len(seeds)
    if n_new == 0:
        return []
    seed_set = set(seeds)
    eligible = [
        w
        for w in table.words
        if w not in seed_set
        and w not in STOPWORDS
        and (vocab is None or w in vocab)
    ]
    if len(eligible) < n_new:
        raise ValueError(
            f"only {len(eligible)} eligible words available for expansion, "
            f"need {n_new}; vocabulary too small for k_total={k_total}"
        )
    seed_mat = table.lookup(in_table, unit=True)
    cand_mat = table.lookup(eligible, unit=True)
    scores = (cand_mat @ seed_mat.T).mean(axis=1)
    order = sorted(range(len(eligible)), key=lambda i: (-scores[i], eligible[i]))
    return [eligible[i] for i in order[:n_new]]


def merge_candidates(
    expansion: Sequence[str],
    statistical: Mapping[str, Sequence[RepWordScore]],
    top_m: int = 3,
) -> CandidateSet:
    """Union the expansion names with each cluster's top statistical words.

    Order is deterministic: expansion words first (their given order), then
    clusters by id, each contributing its top `top_m` words. Stopwords are
    never admitted.
    """
    if top_m < 0:
        raise ValueError(f"top_m must be >= 0, got {top_m}")
    words: list[str] = []
    origin: dict[str, set[str]] = {}

    def admit(word: str, src: str) -> None:
        if word in STOPWORDS:
            return
        if word not in origin:
            origin[word] = set()
            words.append(word)
        origin[word].add(src)

    for w in expansion:
        admit(w, "expansion")
    for cid in sorted(statistical):
        for rep in list(statistical[cid])[:top_m]:
            admit(rep.word, "statistical")
    if not words:
        raise ValueError("candidate pool is empty after merging")
    return CandidateSet(words=words, origin=origin)
