"""Iterative cluster refinement.

Start from an overestimated set of tentative classes (seed names plus words
expanded from them), cluster the corpus, select class-words per cluster, and
repeatedly remove clusters whose class-words collide with a more coherent
cluster. The loop re-estimates names and re-clusters until a pass removes
nothing. Labeled few-shot documents stay pinned to their class's cluster
throughout.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .candidates import (
    cluster_term_stats,
    expand_seeds,
    merge_candidates,
    top_representative_words,
)
from .corpus import Corpus, Supervision
from .embedding import (
    ClassRep,
    DocRep,
    EmbeddingTable,
    class_representation,
    document_representation,
    fallback_embeddings,
)
from .mixture import PseudoLabeling, cluster_documents
from .ranking import (
    Indicativeness,
    RankModel,
    build_training_pairs,
    rank_all_clusters,
    train_rank_model,
)

__all__ = [
    "RefineConfig",
    "Cluster",
    "ClusterState",
    "RefinementResult",
    "coherence",
    "select_class_words",
    "remove_overlapping",
    "run_refinement",
]

logger = logging.getLogger(__name__)


@dataclass
class RefineConfig:
    """Tuning surface for the refinement loop."""

    k: int = 100
    w: int = 50
    beta: float = 0.7
    tau: float = 0.2
    t_cap: int = 5
    top_m: int = 3
    embedding_dim: int = 64
    embedding_window: int = 5
    mlp_hidden: int = 16
    mlp_epochs: int = 500
    mlp_lr: float = 0.05
    gmm_max_iter: int = 200
    gmm_tol: float = 1e-6
    seed: int = 42

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.w < 1:
            raise ValueError(f"w must be >= 1, got {self.w}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.t_cap < 1:
            raise ValueError(f"t_cap must be >= 1, got {self.t_cap}")
        if self.top_m < 0:
            raise ValueError(f"top_m must be >= 0, got {self.top_m}")


@dataclass
class Cluster:
    """One tentative class: member documents plus its naming state."""

    id: str
    member_doc_ids: list[str]
    doc_reps: list[DocRep] = field(repr=False)
    anchor_words: list[str]
    selected_class_words: list[str] = field(default_factory=list)
    coherence: float | None = None
    pinned_seen_class: str | None = None


@dataclass
class ClusterState:
    """The live clusters after an iteration, plus the full pass history."""

    clusters: list[Cluster]
    iteration: int
    history: list[dict] = field(default_factory=list)

    def ids(self) -> list[str]:
        return [c.id for c in self.clusters]

    def get(self, cluster_id: str) -> Cluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(f"unknown cluster {cluster_id!r}")


@dataclass
class RefinementResult:
    """Everything the final classifier and the reports need."""

    state: ClusterState
    table: EmbeddingTable
    doc_reps: list[DocRep]
    pseudo: PseudoLabeling
    class_reps: list[ClassRep]
    rank_model: RankModel
    excluded_doc_ids: list[str]


def coherence(doc_reps: Sequence[DocRep]) -> float:
    """Mean cosine of each member representation against the cluster mean.

    Uses correctly rounded sums, so the value is exactly invariant under
    permutation of the members. Errors when the mean vector is zero.
    """
    if not doc_reps:
        raise ValueError("cannot compute coherence of an empty cluster")
    vecs = [np.asarray(dr.vector, dtype=np.float64) for dr in doc_reps]
    dim = vecs[0].shape[0]
    if any(v.shape != (dim,) for v in vecs):
        raise ValueError("doc rep dimensions disagree")
    n = len(vecs)
    mean = np.array([math.fsum(v[d] for v in vecs) / n for d in range(dim)])
    mean_norm = float(np.linalg.norm(mean))
    if mean_norm < 1e-12:
        raise ValueError("cluster mean representation is zero; degenerate cluster")
    cosines = [
        float(v @ mean) / (float(np.linalg.norm(v)) * mean_norm) for v in vecs
    ]
    return math.fsum(cosines) / n


def select_class_words(
    ranking: Sequence[Indicativeness], beta: float, top_t: int
) -> list[str]:
    """Take the ranking prefix that stays within `beta` of the best score.

    At most `top_t` words; only strictly positive scores qualify. An empty
    result flags the cluster as nameless (a removal candidate unless pinned).
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if top_t < 1:
        raise ValueError(f"top_t must be >= 1, got {top_t}")
    if not ranking:
        return []
    best = ranking[0].score
    if best <= 0:
        return []
    out: list[str] = []
    for entry in ranking[:top_t]:
        if entry.score <= 0 or entry.score / best < beta:
            break
        out.append(entry.word)
    return out


def remove_overlapping(state: ClusterState) -> ClusterState:
    """Resolve class-word collisions between clusters.

    For each pair (in sorted-id order) whose selected class-words intersect:
    a pinned cluster always survives against an unpinned one; two clusters
    pinned to different seen classes both survive; otherwise the lower
    pre-pass coherence loses, ties removing the larger id. Unpinned clusters
    with an empty selection are removed outright.
    """
    clusters = sorted(state.clusters, key=lambda c: c.id)
    removed: set[str] = set()
    reasons: dict[str, str] = {}
    for c in clusters:
        if not c.selected_class_words and c.pinned_seen_class is None:
            removed.add(c.id)
            reasons[c.id] = "empty-selection"
    for i, a in enumerate(clusters):
        for b in clusters[i + 1 :]:
            if a.id in removed or b.id in removed:
                continue
            if not set(a.selected_class_words) & set(b.selected_class_words):
                continue
            a_pin = a.pinned_seen_class is not None
            b_pin = b.pinned_seen_class is not None
            if a_pin and b_pin:
                continue
            if a_pin != b_pin:
                loser = b if a_pin else a
            else:
                if a.coherence is None or b.coherence is None:
                    raise ValueError(
                        f"clusters {a.id!r}/{b.id!r} overlap but lack coherence values"
                    )
                if a.coherence == b.coherence:
                    loser = max(a, b, key=lambda c: c.id)
                else:
                    loser = a if a.coherence < b.coherence else b
            removed.add(loser.id)
            reasons[loser.id] = "overlap"
    survivors = [c for c in clusters if c.id not in removed]
    history = list(state.history)
    history.append(
        {
            "iteration": state.iteration,
            "event": "removal",
            "removed": {cid: reasons[cid] for cid in sorted(removed)},
            "clusters_after": len(survivors),
        }
    )
    return ClusterState(clusters=survivors, iteration=state.iteration, history=history)


def _cluster_id(i: int, k: int) -> str:
    width = max(3, len(str(k - 1)))
    return f"c{i:0{width}d}"


def _compute_doc_reps(
    corpus: Corpus,
    table: EmbeddingTable,
    class_reps: Sequence[ClassRep],
    tau: float,
    clusterable: Sequence[str],
) -> list[DocRep]:
    return [
        document_representation(corpus.get(doc_id), table, class_reps, tau=tau)
        for doc_id in clusterable
    ]


def run_refinement(
    corpus: Corpus,
    supervision: Supervision,
    config: RefineConfig | None = None,
    table: EmbeddingTable | None = None,
) -> RefinementResult:
    """Run the full refinement loop to its fixpoint.

    Returns the final cluster state (with per-pass history), the document
    pseudo-labels, and the artifacts needed to classify new documents.
    """
    config = config or RefineConfig()
    config.validate()
    supervision.validate(corpus)
    names = supervision.seen_class_names
    if config.k < len(names):
        raise ValueError(
            f"k={config.k} is smaller than the number of seen classes ({len(names)})"
        )
    if table is None:
        logger.info("no embedding table given; training fallback embeddings")
        table = fallback_embeddings(
            corpus, dim=config.embedding_dim, window=config.embedding_window, seed=config.seed
        )
    missing = [n for n in names if n not in table]
    if missing:
        raise ValueError(
            f"seen class name(s) missing from the embedding table: {missing}"
        )

    clusterable = [
        d.id for d in corpus.documents if any(t in table for t in d.tokens)
    ]
    excluded = [d.id for d in corpus.documents if not any(t in table for t in d.tokens)]
    if excluded:
        warnings.warn(
            f"{len(excluded)} document(s) have no embedding-covered tokens and are "
            f"excluded from clustering (first: {excluded[:5]})",
            stacklevel=2,
        )
    clusterable_set = set(clusterable)
    labeled_ids = supervision.all_labeled_doc_ids()
    unclusterable_labeled = [i for i in labeled_ids if i not in clusterable_set]
    if unclusterable_labeled:
        raise ValueError(
            f"labeled document(s) cannot be represented with this embedding table: "
            f"{unclusterable_labeled[:5]}"
        )

    expansion = expand_seeds(names, table, config.k, vocab=corpus.vocab)
    initial_names = list(names) + expansion
    anchors: dict[str, list[str]] = {
        _cluster_id(i, config.k): [w] for i, w in enumerate(initial_names)
    }
    # binding: seen class name -> cluster id currently carrying its pin
    binding: dict[str, str] = {
        name: _cluster_id(i, config.k) for i, name in enumerate(names)
    }
    pin_by_doc_label: list[tuple[str, str]] = []
    for label, ids in supervision.labeled_examples.items():
        name = supervision.name_by_label[label]
        for doc_id in ids:
            pin_by_doc_label.append((doc_id, name))

    history: list[dict] = []
    iteration = 0
    while True:
        iteration += 1
        top_t = min(iteration, config.t_cap)
        cluster_ids = sorted(anchors)
        class_reps = [
            class_representation(anchors[cid], table, class_id=cid)
            for cid in cluster_ids
        ]
        doc_reps = _compute_doc_reps(corpus, table, class_reps, config.tau, clusterable)
        pins = {doc_id: binding[name] for doc_id, name in pin_by_doc_label}
        gmm, pseudo = cluster_documents(
            doc_reps,
            class_reps,
            pins=pins,
            max_iter=config.gmm_max_iter,
            tol=config.gmm_tol,
        )
        members = pseudo.members()
        emptied = sorted(cid for cid in cluster_ids if cid not in members)
        live_ids = [cid for cid in cluster_ids if cid in members]
        rep_by_doc = {dr.doc_id: dr for dr in doc_reps}

        stats = {
            cid: cluster_term_stats(corpus, cid, members[cid]) for cid in live_ids
        }
        rep_scores = {
            cid: top_representative_words(stats[cid], corpus, config.w)
            for cid in live_ids
        }
        rep_words = {
            cid: [r.word for r in scores if r.word in table]
            for cid, scores in rep_scores.items()
        }
        rankable = {cid: ws for cid, ws in rep_words.items() if ws}
        if not rankable:
            raise RuntimeError(
                "no cluster has representative words covered by the embedding "
                "table; the corpus is too degenerate to refine"
            )
        candidates = merge_candidates(initial_names, rep_scores, top_m=config.top_m)
        pairs = build_training_pairs(
            supervision, candidates, corpus, table, rep_list_size=config.w
        )
        model = train_rank_model(
            pairs,
            hidden=config.mlp_hidden,
            epochs=config.mlp_epochs,
            lr=config.mlp_lr,
            seed=config.seed,
        )
        rankings = rank_all_clusters(candidates, rankable, model, table, top_t)

        clusters: list[Cluster] = []
        for cid in live_ids:
            ranking = rankings.get(cid, [])
            selection = select_class_words(ranking, config.beta, top_t)
            member_ids = sorted(members[cid])
            reps = [rep_by_doc[d] for d in member_ids]
            clusters.append(
                Cluster(
                    id=cid,
                    member_doc_ids=member_ids,
                    doc_reps=reps,
                    anchor_words=list(anchors[cid]),
                    selected_class_words=selection,
                    coherence=coherence(reps),
                )
            )
        by_id = {c.id: c for c in clusters}

        # Re-derive pin bindings: a cluster that selected a seen class name
        # inherits the pin; otherwise the pin stays with the cluster holding
        # the class's labeled docs. Bindings must stay distinct per class,
        # so a cluster claimed by an earlier class is skipped.
        new_binding: dict[str, str] = {}
        taken: set[str] = set()
        for name in names:
            holder = binding[name]
            selectors = [
                c.id
                for c in clusters
                if name in c.selected_class_words and c.id not in taken
            ]
            if holder in selectors:
                chosen = holder
            elif selectors:
                chosen = selectors[0]
            elif holder not in taken:
                chosen = holder
            else:
                free = [c.id for c in clusters if c.id not in taken]
                if not free:
                    raise RuntimeError(
                        "fewer live clusters than seen classes while re-deriving pins"
                    )
                chosen = free[0]
            new_binding[name] = chosen
            taken.add(chosen)
        binding = new_binding
        for name, cid in binding.items():
            by_id[cid].pinned_seen_class = name
        # A pinned cluster that selected nothing still needs a name to anchor
        # the next re-clustering: its seen class name.
        for name, cid in binding.items():
            if not by_id[cid].selected_class_words:
                by_id[cid].selected_class_words = [name]

        state = ClusterState(clusters=clusters, iteration=iteration, history=history)
        state.history.append(
            {
                "iteration": iteration,
                "event": "pass",
                "top_t": top_t,
                "clusters_before": len(cluster_ids),
                "emptied": emptied,
                "empty_components": gmm.empty_components,
                "selections": {c.id: list(c.selected_class_words) for c in clusters},
                "coherence": {c.id: c.coherence for c in clusters},
                "pins": dict(sorted(binding.items())),
            }
        )
        state = remove_overlapping(state)
        history = state.history
        survivor_ids = set(state.ids())
        n_removed = len(emptied) + (len(clusters) - len(survivor_ids))
        logger.info(
            "pass %d: %d clusters -> %d (emptied %d, removed %d)",
            iteration,
            len(cluster_ids),
            len(survivor_ids),
            len(emptied),
            len(clusters) - len(survivor_ids),
        )
        if len(survivor_ids) < len(names):
            raise RuntimeError(
                f"refinement degenerated: {len(survivor_ids)} clusters live but "
                f"{len(names)} seen classes required"
            )
        if n_removed == 0:
            final_state = ClusterState(
                clusters=state.clusters, iteration=iteration, history=history
            )
            return RefinementResult(
                state=final_state,
                table=table,
                doc_reps=doc_reps,
                pseudo=pseudo,
                class_reps=class_reps,
                rank_model=model,
                excluded_doc_ids=excluded,
            )
        anchors = {
            c.id: list(c.selected_class_words)
            for c in state.clusters
        }
