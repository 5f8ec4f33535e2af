"""Document clustering and the final pseudo-label classifier.

Clustering is a diagonal-covariance Gaussian mixture seeded at the class
representations. Labeled documents are pinned: their responsibilities stay
one-hot on their class's component throughout EM.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .embedding import ClassRep, DocRep
from .validation import check_finite

__all__ = [
    "GmmModel",
    "PseudoLabeling",
    "FinalClassifier",
    "cluster_documents",
    "train_final_classifier",
    "predict",
    "write_predictions",
    "read_predictions",
]

_VAR_FLOOR = 1e-6
_WEIGHT_FLOOR = 1e-10
_LL_DECREASE_TOL = 1e-9


@dataclass
class GmmModel:
    """Fitted diagonal-covariance Gaussian mixture."""

    component_ids: list[str]
    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray
    log_likelihoods: list[float] = field(repr=False)
    empty_components: list[str] = field(default_factory=list)
    converged: bool = True


@dataclass
class PseudoLabeling:
    """Hard assignment + posterior confidence for every clustered document."""

    assignment: dict[str, str]
    posterior: dict[str, float]

    def members(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for doc_id, cid in self.assignment.items():
            out.setdefault(cid, []).append(doc_id)
        return out


def _log_gaussian_matrix(
    x: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """(n_docs, n_components) log N(x | mu_k, diag(var_k))."""
    inv = 1.0 / variances
    quad = (x * x) @ inv.T - 2.0 * (x @ (means * inv).T) + ((means * means) * inv).sum(axis=1)
    log_det = np.log(variances).sum(axis=1)
    d = x.shape[1]
    return -0.5 * (d * np.log(2.0 * np.pi) + log_det + quad)


def cluster_documents(
    doc_reps: Sequence[DocRep],
    class_reps: Sequence[ClassRep],
    pins: Mapping[str, str] | None = None,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> tuple[GmmModel, PseudoLabeling]:
    """EM-fit a Gaussian mixture with one component per class representation.

    Means start at the class representation vectors. `pins` maps document ids
    to component (class) ids whose responsibility is clamped to one-hot. The
    log-likelihood is checked to be non-decreasing every step.
    """
    if not doc_reps:
        raise ValueError("no document representations to cluster")
    if not class_reps:
        raise ValueError("no class representations; need at least one component")
    comp_ids = [cr.class_id for cr in class_reps]
    if len(set(comp_ids)) != len(comp_ids):
        raise ValueError(f"duplicate component ids: {comp_ids}")
    comp_index = {cid: k for k, cid in enumerate(comp_ids)}
    doc_ids = [dr.doc_id for dr in doc_reps]
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("duplicate document ids in doc_reps")
    x = np.stack([dr.vector for dr in doc_reps], axis=0).astype(np.float64)
    check_finite(x, "document representations")
    n, d = x.shape
    k = len(comp_ids)

    pin_rows: list[int] = []
    pin_cols: list[int] = []
    if pins:
        doc_index = {doc_id: i for i, doc_id in enumerate(doc_ids)}
        for doc_id, cid in pins.items():
            if doc_id not in doc_index:
                raise ValueError(f"pinned document {doc_id!r} has no representation")
            if cid not in comp_index:
                raise ValueError(f"pinned document {doc_id!r} targets unknown component {cid!r}")
            pin_rows.append(doc_index[doc_id])
            pin_cols.append(comp_index[cid])
    pin_rows_arr = np.array(pin_rows, dtype=np.intp)
    pin_cols_arr = np.array(pin_cols, dtype=np.intp)

    means = np.stack([np.asarray(cr.vector, dtype=np.float64) for cr in class_reps], axis=0)
    global_var = np.maximum(x.var(axis=0), _VAR_FLOOR)
    variances = np.tile(global_var, (k, 1))
    weights = np.full(k, 1.0 / k)

    def responsibilities() -> tuple[np.ndarray, float]:
        joint = _log_gaussian_matrix(x, means, variances) + np.log(weights)
        resp = softmax(joint, axis=1)
        ll_rows = logsumexp(joint, axis=1)
        if len(pin_rows_arr):
            resp[pin_rows_arr] = 0.0
            resp[pin_rows_arr, pin_cols_arr] = 1.0
            ll_rows = ll_rows.copy()
            ll_rows[pin_rows_arr] = joint[pin_rows_arr, pin_cols_arr]
        return resp, float(ll_rows.sum())

    lls: list[float] = []
    empty: set[str] = set()
    converged = False
    resp, ll = responsibilities()
    lls.append(ll)
    for _ in range(max_iter):
        nk = resp.sum(axis=0)
        alive = nk > _WEIGHT_FLOOR
        for j in np.flatnonzero(~alive):
            empty.add(comp_ids[j])
        safe_nk = np.where(alive, nk, 1.0)
        new_means = (resp.T @ x) / safe_nk[:, None]
        ex2 = (resp.T @ (x * x)) / safe_nk[:, None]
        new_vars = np.maximum(ex2 - new_means**2, _VAR_FLOOR)
        # Empty components keep their previous parameters at floor weight.
        # Live weights stay at their exact maximizer nk/n (no renormalization),
        # otherwise the floor would nudge them off the argmax and the
        # log-likelihood could dip below the monotonicity tolerance.
        means = np.where(alive[:, None], new_means, means)
        variances = np.where(alive[:, None], new_vars, variances)
        weights = np.where(alive, nk / n, _WEIGHT_FLOOR)
        resp, ll = responsibilities()
        # Tolerance is relative: at |LL| ~ 1e5 an absolute 1e-9 sits below
        # what float64 matmul reductions can resolve.
        if ll + _LL_DECREASE_TOL * max(1.0, abs(lls[-1])) < lls[-1]:
            raise RuntimeError(
                f"EM log-likelihood decreased from {lls[-1]:.9f} to {ll:.9f}"
            )
        improved = ll - lls[-1]
        lls.append(ll)
        if improved < tol:
            converged = True
            break

    assignment: dict[str, str] = {}
    posterior: dict[str, float] = {}
    hard = np.argmax(resp, axis=1)
    for i, doc_id in enumerate(doc_ids):
        cid = comp_ids[int(hard[i])]
        assignment[doc_id] = cid
        posterior[doc_id] = float(resp[i, hard[i]])
    model = GmmModel(
        component_ids=comp_ids,
        means=means,
        variances=variances,
        weights=weights,
        log_likelihoods=lls,
        empty_components=sorted(empty),
        converged=converged,
    )
    return model, PseudoLabeling(assignment=assignment, posterior=posterior)


@dataclass
class FinalClassifier:
    """Multinomial logistic regression over document representations.

    `classes` is sorted, so an argmax over scores breaks ties toward the
    lexicographically smallest class.
    """

    classes: list[str]
    coef: np.ndarray
    intercept: np.ndarray

    @property
    def dim(self) -> int:
        return self.coef.shape[0]


def train_final_classifier(
    doc_reps: Sequence[DocRep],
    pseudo: PseudoLabeling,
    epochs: int = 400,
    lr: float = 1.0,
    seed: int = 0,
) -> FinalClassifier:
    """Fit the final classifier on the pseudo-labels by full-batch gradient descent.

    Deterministic given the seed (initialization is zero either way). Needs at
    least two distinct pseudo-classes.
    """
    del seed  # zero initialization; kept for interface stability
    reps = [dr for dr in doc_reps if dr.doc_id in pseudo.assignment]
    if not reps:
        raise ValueError("no document representation matches a pseudo-label")
    classes = sorted(set(pseudo.assignment.values()))
    if len(classes) < 2:
        raise ValueError(
            f"need at least two pseudo-classes to train a classifier, got {classes}"
        )
    class_index = {c: j for j, c in enumerate(classes)}
    x = np.stack([dr.vector for dr in reps], axis=0).astype(np.float64)
    y = np.array([class_index[pseudo.assignment[dr.doc_id]] for dr in reps])
    n, d = x.shape
    c = len(classes)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), y] = 1.0
    coef = np.zeros((d, c))
    intercept = np.zeros(c)
    for _ in range(epochs):
        p = softmax(x @ coef + intercept, axis=1)
        g = (p - onehot) / n
        coef -= lr * (x.T @ g)
        intercept -= lr * g.sum(axis=0)
    return FinalClassifier(classes=classes, coef=coef, intercept=intercept)


def predict(classifier: FinalClassifier, doc_reps: Sequence[DocRep]) -> dict[str, str]:
    """Hard class per document; ties go to the lexicographically smallest class."""
    if not doc_reps:
        return {}
    x = np.stack([dr.vector for dr in doc_reps], axis=0).astype(np.float64)
    if x.shape[1] != classifier.dim:
        raise ValueError(
            f"representation dim {x.shape[1]} does not match classifier dim {classifier.dim}"
        )
    scores = x @ classifier.coef + classifier.intercept
    hard = np.argmax(scores, axis=1)
    return {dr.doc_id: classifier.classes[int(hard[i])] for i, dr in enumerate(doc_reps)}


def write_predictions(predictions: Mapping[str, str], path: str | Path) -> None:
    """Tab-separated `doc_id<TAB>class_id` rows, sorted by document id."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for doc_id in sorted(predictions):
            writer.writerow([doc_id, predictions[doc_id]])


def read_predictions(path: str | Path) -> dict[str, str]:
    path = Path(path)
    out: dict[str, str] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 tab-separated fields")
            doc_id, cid = row
            if doc_id in out:
                raise ValueError(f"{path}: line {lineno}: duplicate document id {doc_id!r}")
            out[doc_id] = cid
    if not out:
        raise ValueError(f"{path}: no predictions found")
    return out
