"""Candidate ranking: learned class-word scorer plus a generic-word penalty.

A small feed-forward scorer estimates how likely a candidate word names a
cluster, from the distribution of distances between the word and the cluster's
representative words. Words that rank well everywhere are generic; a median-
rank penalty suppresses them.
"""

from __future__ import annotations

import json
import math
import statistics
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import expit

from .candidates import CandidateSet
from .corpus import Corpus, Supervision
from .embedding import EmbeddingTable

__all__ = [
    "WordClusterFeatures",
    "RankModel",
    "Indicativeness",
    "features",
    "feature_matrix",
    "build_training_pairs",
    "train_rank_model",
    "generic_penalty",
    "rank_all_clusters",
    "indicativeness_ranking",
]

_P_EPS = 1e-12


@dataclass(frozen=True)
class WordClusterFeatures:
    """Distance statistics between one word and one cluster's representative words."""

    mean_euclidean: float
    var_euclidean: float
    mean_cosine: float
    var_cosine: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.mean_euclidean, self.var_euclidean, self.mean_cosine, self.var_cosine]
        )


def feature_matrix(
    words: Sequence[str], rep_words: Sequence[str], table: EmbeddingTable
) -> np.ndarray:
    """(len(words), 4) feature rows against one representative-word list.

    Variances are population variances. Every word must be in the table.
    """
    if not rep_words:
        raise ValueError("representative word list is empty")
    missing = [w for w in list(words) + list(rep_words) if w not in table]
    if missing:
        raise ValueError(f"word(s) not in embedding table: {sorted(set(missing))[:5]}")
    x = table.lookup(words)
    r = table.lookup(rep_words)
    dist = cdist(x, r)
    x_unit = x / np.linalg.norm(x, axis=1, keepdims=True)
    r_unit = r / np.linalg.norm(r, axis=1, keepdims=True)
    cos = x_unit @ r_unit.T
    return np.stack(
        [dist.mean(axis=1), dist.var(axis=1), cos.mean(axis=1), cos.var(axis=1)],
        axis=1,
    )


def features(
    word: str, cluster_rep_words: Sequence[str], table: EmbeddingTable
) -> WordClusterFeatures:
    row = feature_matrix([word], cluster_rep_words, table)[0]
    return WordClusterFeatures(*map(float, row))


class RankModel:
    """One-hidden-layer sigmoid scorer over the 4 distance features.

    Inputs are standardized with the training-set mean/std; the output is a
    probability clipped into the open interval (0, 1).
    """

    def __init__(
        self,
        w1: np.ndarray,
        b1: np.ndarray,
        w2: np.ndarray,
        b2: float,
        feat_mean: np.ndarray,
        feat_std: np.ndarray,
    ):
        self.w1 = np.asarray(w1, dtype=np.float64)
        self.b1 = np.asarray(b1, dtype=np.float64)
        self.w2 = np.asarray(w2, dtype=np.float64)
        self.b2 = float(b2)
        self.feat_mean = np.asarray(feat_mean, dtype=np.float64)
        self.feat_std = np.asarray(feat_std, dtype=np.float64)

    def predict_proba(self, feats: np.ndarray) -> np.ndarray:
        x = (np.atleast_2d(np.asarray(feats, dtype=np.float64)) - self.feat_mean) / self.feat_std
        hidden = expit(x @ self.w1 + self.b1)
        p = expit(hidden @ self.w2 + self.b2)
        return np.clip(p, _P_EPS, 1.0 - _P_EPS)

    def score_one(self, feats: WordClusterFeatures) -> float:
        return float(self.predict_proba(feats.as_array())[0])

    def to_json(self) -> str:
        payload = {
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
            "feat_mean": self.feat_mean.tolist(),
            "feat_std": self.feat_std.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RankModel":
        payload = json.loads(text)
        return cls(
            w1=np.array(payload["w1"]),
            b1=np.array(payload["b1"]),
            w2=np.array(payload["w2"]),
            b2=payload["b2"],
            feat_mean=np.array(payload["feat_mean"]),
            feat_std=np.array(payload["feat_std"]),
        )


def build_training_pairs(
    supervision: Supervision,
    candidates: CandidateSet,
    corpus: Corpus,
    table: EmbeddingTable,
    rep_list_size: int = 50,
) -> list[tuple[WordClusterFeatures, int]]:
    """Positive and negative training pairs from the labeled documents.

    Each seen class's labeled documents form a virtual cluster. The class name
    against that cluster is a positive; the candidate word farthest (Euclidean)
    from the class name vector, against the same cluster, is a negative.
    """
    from .candidates import cluster_term_stats, top_representative_words

    missing = [n for n in supervision.seen_class_names if n not in table]
    if missing:
        raise ValueError(
            f"seen class name(s) missing from the embedding table: {missing}"
        )
    usable = [w for w in candidates.words if w in table]
    if not usable:
        raise ValueError("no candidate word is covered by the embedding table")
    cand_mat = table.lookup(usable)
    pairs: list[tuple[WordClusterFeatures, int]] = []
    for label, name in zip(supervision.labeled_examples, supervision.seen_class_names):
        doc_ids = supervision.labeled_examples[label]
        stats = cluster_term_stats(corpus, f"virtual:{name}", doc_ids)
        reps = [r.word for r in top_representative_words(stats, corpus, rep_list_size)]
        reps = [w for w in reps if w in table]
        if not reps:
            raise ValueError(
                f"virtual cluster for class {label!r} has no representative words "
                f"covered by the embedding table"
            )
        name_vec = table[name]
        dists = np.linalg.norm(cand_mat - np.asarray(name_vec, dtype=np.float64), axis=1)
        order = sorted(range(len(usable)), key=lambda i: (-dists[i], usable[i]))
        negative = usable[order[0]]
        pairs.append((features(name, reps, table), 1))
        pairs.append((features(negative, reps, table), 0))
    return pairs


def train_rank_model(
    pairs: Sequence[tuple[WordClusterFeatures, int]],
    hidden: int = 16,
    epochs: int = 500,
    lr: float = 0.05,
    seed: int = 0,
) -> RankModel:
    """Fit the scorer by full-batch gradient descent on binary cross-entropy.

    Deterministic given the seed. Requires both a positive and a negative pair.
    """
    if not pairs:
        raise ValueError("no training pairs")
    y = np.array([label for _, label in pairs], dtype=np.float64)
    if len(set(y.tolist())) < 2:
        raise ValueError("training pairs contain only one class; need both labels")
    x = np.stack([f.as_array() for f, _ in pairs], axis=0)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std < 1e-12] = 1.0
    xs = (x - mean) / std

    rng = np.random.default_rng(seed)
    n_in = xs.shape[1]
    w1 = rng.normal(0.0, math.sqrt(2.0 / (n_in + hidden)), size=(n_in, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, math.sqrt(2.0 / (hidden + 1)), size=hidden)
    b2 = 0.0
    n = xs.shape[0]
    for _ in range(epochs):
        z1 = xs @ w1 + b1
        a1 = expit(z1)
        p = expit(a1 @ w2 + b2)
        dz2 = (p - y) / n
        gw2 = a1.T @ dz2
        gb2 = dz2.sum()
        da1 = np.outer(dz2, w2)
        dz1 = da1 * a1 * (1.0 - a1)
        gw1 = xs.T @ dz1
        gb1 = dz1.sum(axis=0)
        w1 -= lr * gw1
        b1 -= lr * gb1
        w2 -= lr * gw2
        b2 -= lr * gb2
    return RankModel(w1=w1, b1=b1, w2=w2, b2=b2, feat_mean=mean, feat_std=std)


def generic_penalty(ranks_across_clusters: Mapping[str, int], cluster_id: str) -> float:
    """log(median rank across clusters / (1 + rank in this cluster)).

    Positive when the word ranks unusually well in this cluster compared to
    its typical rank; <= 0 when its rank here is no better than elsewhere.
    """
    if cluster_id not in ranks_across_clusters:
        raise ValueError(f"cluster {cluster_id!r} missing from the rank map")
    ranks = list(ranks_across_clusters.values())
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be 1-based positive integers")
    med = statistics.median(ranks)
    return math.log(med / (1 + ranks_across_clusters[cluster_id]))


@dataclass(frozen=True)
class Indicativeness:
    """Final ranking entry for one candidate word in one cluster."""

    word: str
    cluster_id: str
    p: float
    penalty: float
    score: float
    rank_in_cluster: int


def rank_all_clusters(
    candidates: CandidateSet,
    rep_words_by_cluster: Mapping[str, Sequence[str]],
    model: RankModel,
    table: EmbeddingTable,
    top_t: int,
) -> dict[str, list[Indicativeness]]:
    """Score and rank every candidate in every cluster.

    Per cluster, candidates are ranked by descending scorer probability (ties:
    lexicographic). Words whose rank is within the top `top_t` in more than
    half of the clusters are generic and excluded from every returned list.
    Returned lists are sorted by descending penalized score, ties lexicographic.
    """
    if top_t < 1:
        raise ValueError(f"top_t must be >= 1, got {top_t}")
    if not rep_words_by_cluster:
        raise ValueError("no clusters to rank against")
    usable = [w for w in candidates.words if w in table]
    skipped = [w for w in candidates.words if w not in table]
    if skipped:
        warnings.warn(
            f"{len(skipped)} candidate word(s) missing from the embedding table, "
            f"skipped (first: {skipped[:5]})",
            stacklevel=2,
        )
    if not usable:
        raise ValueError("candidate set is empty after table lookup")
    cluster_ids = sorted(rep_words_by_cluster)
    p_by_cluster: dict[str, np.ndarray] = {}
    rank_by_cluster: dict[str, dict[str, int]] = {}
    for cid in cluster_ids:
        p = model.predict_proba(feature_matrix(usable, rep_words_by_cluster[cid], table))
        p_by_cluster[cid] = p
        order = sorted(range(len(usable)), key=lambda i: (-p[i], usable[i]))
        rank_by_cluster[cid] = {usable[i]: rank for rank, i in enumerate(order, start=1)}
    # A word near the top of most clusters names none of them.
    generic: set[str] = set()
    if len(cluster_ids) >= 2:
        for w in usable:
            hits = sum(1 for cid in cluster_ids if rank_by_cluster[cid][w] <= top_t)
            if hits * 2 > len(cluster_ids):
                generic.add(w)
    out: dict[str, list[Indicativeness]] = {}
    for cid in cluster_ids:
        entries = []
        for i, w in enumerate(usable):
            if w in generic:
                continue
            ranks = {c: rank_by_cluster[c][w] for c in cluster_ids}
            mu = generic_penalty(ranks, cid)
            p = float(p_by_cluster[cid][i])
            entries.append(
                Indicativeness(
                    word=w,
                    cluster_id=cid,
                    p=p,
                    penalty=mu,
                    score=p * mu,
                    rank_in_cluster=ranks[cid],
                )
            )
        entries.sort(key=lambda e: (-e.score, e.word))
        out[cid] = entries
    return out


def indicativeness_ranking(
    candidates: CandidateSet,
    cluster_id: str,
    rep_words_by_cluster: Mapping[str, Sequence[str]],
    model: RankModel,
    table: EmbeddingTable,
    top_t: int,
) -> list[Indicativeness]:
    """Ranking for a single cluster (computed jointly across all clusters)."""
    if cluster_id not in rep_words_by_cluster:
        raise ValueError(f"unknown cluster {cluster_id!r}")
    return rank_all_clusters(candidates, rep_words_by_cluster, model, table, top_t)[
        cluster_id
    ]
