"""Evaluation: map discovered clusters onto gold classes, then score.

Clusters are matched to classes by maximum-weight bipartite matching on the
overlap-count matrix; leftover clusters fall back to their majority class.
Reports carry micro/macro F1 overall and restricted to seen/unseen classes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "OverlapMatrix",
    "ClusterAssignment",
    "PerClass",
    "SubReport",
    "EvalReport",
    "overlap_matrix",
    "assign_clusters",
    "f1_report",
]


@dataclass
class OverlapMatrix:
    """counts[i, j] = documents in cluster i whose gold class is j."""

    counts: np.ndarray
    cluster_ids: list[str]
    class_ids: list[str]


def overlap_matrix(
    predictions: Mapping[str, str], gold: Mapping[str, str]
) -> OverlapMatrix:
    """Count cluster/class co-occurrences over the predicted documents.

    Rows follow sorted cluster ids, columns sorted gold class ids. Every
    predicted document must have a gold label.
    """
    if not predictions:
        raise ValueError("no predictions to evaluate")
    missing = [d for d in predictions if d not in gold]
    if missing:
        raise ValueError(
            f"{len(missing)} predicted document(s) have no gold label "
            f"(first offenders: {sorted(missing)[:5]})"
        )
    cluster_ids = sorted(set(predictions.values()))
    class_ids = sorted({gold[d] for d in predictions})
    row = {c: i for i, c in enumerate(cluster_ids)}
    col = {c: j for j, c in enumerate(class_ids)}
    counts = np.zeros((len(cluster_ids), len(class_ids)), dtype=np.int64)
    for doc_id, cid in predictions.items():
        counts[row[cid], col[gold[doc_id]]] += 1
    return OverlapMatrix(counts=counts, cluster_ids=cluster_ids, class_ids=class_ids)


@dataclass
class ClusterAssignment:
    """Cluster -> gold class map derived from the overlap matrix.

    `matched` holds the bipartite-matching pairs; clusters not in the matching
    were mapped by row-argmax fallback. `virtual_classes` lists gold classes
    left without any cluster (fewer clusters than classes).
    """

    mapping: dict[str, str]
    matched: list[tuple[str, str]] = field(default_factory=list)
    virtual_classes: list[str] = field(default_factory=list)


def _matching_value(counts: np.ndarray) -> float:
    if counts.shape[0] == 0 or counts.shape[1] == 0:
        return 0.0
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return float(counts[rows, cols].sum())


def assign_clusters(m: OverlapMatrix) -> ClusterAssignment:
    """Match clusters to classes, maximizing total overlap.

    Among weight-optimal complete matchings the canonical one is chosen: the
    lexicographically smallest assignment vector over rows in sorted-cluster
    order, where class ids compare ascending and "unmatched" sorts last.
    Unmatched clusters map to their majority class (ties: smaller class id).
    """
    counts = np.asarray(m.counts, dtype=np.float64)
    n_rows, n_cols = counts.shape
    if n_rows == 0 or n_cols == 0:
        raise ValueError("overlap matrix is empty")
    # Fix each row's partner in order, keeping global optimality at every
    # step. Integer counts make the float equality test exact. A row stays
    # unmatched only when no column choice reaches the optimum, i.e. every
    # optimal complete matching skips it; "unmatched" thereby sorts last.
    fixed: list[int | None] = []
    free_cols = list(range(n_cols))
    for i in range(n_rows):
        target = _matching_value(counts[np.ix_(range(i, n_rows), free_cols)])
        chosen: int | None = None
        for pos, j in enumerate(free_cols):
            rest_cols = free_cols[:pos] + free_cols[pos + 1 :]
            rest = _matching_value(counts[np.ix_(range(i + 1, n_rows), rest_cols)])
            if counts[i, j] + rest == target:
                chosen = j
                break
        fixed.append(chosen)
        if chosen is not None:
            free_cols.remove(chosen)
    mapping: dict[str, str] = {}
    matched: list[tuple[str, str]] = []
    for i, j in enumerate(fixed):
        cid = m.cluster_ids[i]
        if j is not None:
            mapping[cid] = m.class_ids[j]
            matched.append((cid, m.class_ids[j]))
        else:
            best = int(np.argmax(m.counts[i]))
            mapping[cid] = m.class_ids[best]
    virtual = sorted(m.class_ids[j] for j in free_cols)
    return ClusterAssignment(mapping=mapping, matched=matched, virtual_classes=virtual)


@dataclass
class PerClass:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class SubReport:
    micro_f1: float | None
    macro_f1: float | None
    per_class: dict[str, PerClass]


@dataclass
class EvalReport:
    overall: SubReport
    seen: SubReport
    unseen: SubReport
    predicted_class_count: int

    def to_json(self) -> str:
        def sub(s: SubReport) -> dict:
            return {
                "micro_f1": s.micro_f1,
                "macro_f1": s.macro_f1,
                "per_class": {
                    c: {
                        "precision": pc.precision,
                        "recall": pc.recall,
                        "f1": pc.f1,
                        "support": pc.support,
                    }
                    for c, pc in sorted(s.per_class.items())
                },
            }

        return json.dumps(
            {
                "overall": sub(self.overall),
                "seen": sub(self.seen),
                "unseen": sub(self.unseen),
                "predicted_class_count": self.predicted_class_count,
            },
            indent=2,
            sort_keys=True,
        )


def _score_subset(
    mapped: Mapping[str, str], gold: Mapping[str, str], classes: Sequence[str]
) -> SubReport:
    classes = sorted(classes)
    if not classes:
        return SubReport(micro_f1=None, macro_f1=None, per_class={})
    docs = [d for d in mapped if gold[d] in set(classes)]
    tp: dict[str, int] = {c: 0 for c in classes}
    fp: dict[str, int] = {c: 0 for c in classes}
    fn: dict[str, int] = {c: 0 for c in classes}
    support: dict[str, int] = {c: 0 for c in classes}
    for d in docs:
        g = gold[d]
        p = mapped[d]
        support[g] += 1
        if p == g:
            tp[g] += 1
        else:
            fn[g] += 1
            if p in fp:
                fp[p] += 1
    per_class: dict[str, PerClass] = {}
    usable: list[str] = []
    for c in classes:
        if support[c] == 0:
            warnings.warn(
                f"class {c!r} has no gold documents in this subset; "
                f"excluded from macro averaging",
                stacklevel=3,
            )
            continue
        prec = tp[c] / (tp[c] + fp[c]) if (tp[c] + fp[c]) > 0 else 0.0
        rec = tp[c] / (tp[c] + fn[c])
        f1 = (2 * prec * rec / (prec + rec)) if (prec + rec) > 0 else 0.0
        per_class[c] = PerClass(precision=prec, recall=rec, f1=f1, support=support[c])
        usable.append(c)
    total_tp = sum(tp.values())
    total_fp = sum(fp.values())
    total_fn = sum(fn.values())
    denom = 2 * total_tp + total_fp + total_fn
    micro = (2 * total_tp / denom) if denom > 0 else 0.0
    macro = (
        sum(per_class[c].f1 for c in usable) / len(usable) if usable else None
    )
    return SubReport(micro_f1=micro, macro_f1=macro, per_class=per_class)


def f1_report(
    assignment: ClusterAssignment,
    predictions: Mapping[str, str],
    gold: Mapping[str, str],
    seen_classes: Sequence[str] = (),
) -> EvalReport:
    """Score predictions after mapping clusters through `assignment`.

    Micro-F1 aggregates counts globally; macro-F1 averages per-class F1 over
    classes with at least one gold document. The seen/unseen sub-reports
    restrict both documents and classes to the respective class subset.
    """
    missing = [d for d in predictions if d not in gold]
    if missing:
        raise ValueError(
            f"{len(missing)} predicted document(s) have no gold label "
            f"(first offenders: {sorted(missing)[:5]})"
        )
    unmapped = sorted({c for c in predictions.values() if c not in assignment.mapping})
    if unmapped:
        raise ValueError(f"cluster(s) missing from the assignment: {unmapped[:5]}")
    mapped = {d: assignment.mapping[c] for d, c in predictions.items()}
    all_classes = sorted({gold[d] for d in predictions})
    seen = sorted(set(seen_classes) & set(all_classes))
    unseen = sorted(set(all_classes) - set(seen))
    return EvalReport(
        overall=_score_subset(mapped, gold, all_classes),
        seen=_score_subset(mapped, gold, seen),
        unseen=_score_subset(mapped, gold, unseen),
        predicted_class_count=len(set(predictions.values())),
    )
