"""Top-level estimator: fit the open-world pipeline, predict cluster labels."""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .corpus import Corpus, Supervision
from .embedding import EmbeddingTable, document_representation
from .mixture import FinalClassifier, predict as classifier_predict, train_final_classifier
from .refine import RefineConfig, RefinementResult, run_refinement

__all__ = ["OpenWorldTextClassifier"]


class OpenWorldTextClassifier(BaseEstimator):
    """Discover and label classes in a corpus from a few seen-class examples.

    Follows scikit-learn conventions: hyperparameters in ``__init__`` (stored
    verbatim, introspectable via ``get_params``), data passed to ``fit``.
    The label space is open: ``predict`` returns ids of discovered clusters,
    a superset of the seen classes.

    Parameters mirror the refinement configuration; ``embedding_table`` is an
    optional pre-built :class:`~openclass.embedding.EmbeddingTable` (for
    example one exported from a contextual model). Without it, corpus-local
    fallback embeddings are trained.
    """

    def __init__(
        self,
        k: int = 100,
        w: int = 50,
        beta: float = 0.7,
        tau: float = 0.2,
        t_cap: int = 5,
        top_m: int = 3,
        embedding_dim: int = 64,
        embedding_window: int = 5,
        mlp_hidden: int = 16,
        mlp_epochs: int = 500,
        mlp_lr: float = 0.05,
        classifier_epochs: int = 400,
        classifier_lr: float = 1.0,
        random_state: int = 42,
        embedding_table: EmbeddingTable | None = None,
    ):
        self.k = k
        self.w = w
        self.beta = beta
        self.tau = tau
        self.t_cap = t_cap
        self.top_m = top_m
        self.embedding_dim = embedding_dim
        self.embedding_window = embedding_window
        self.mlp_hidden = mlp_hidden
        self.mlp_epochs = mlp_epochs
        self.mlp_lr = mlp_lr
        self.classifier_epochs = classifier_epochs
        self.classifier_lr = classifier_lr
        self.random_state = random_state
        self.embedding_table = embedding_table

    def _config(self) -> RefineConfig:
        return RefineConfig(
            k=self.k,
            w=self.w,
            beta=self.beta,
            tau=self.tau,
            t_cap=self.t_cap,
            top_m=self.top_m,
            embedding_dim=self.embedding_dim,
            embedding_window=self.embedding_window,
            mlp_hidden=self.mlp_hidden,
            mlp_epochs=self.mlp_epochs,
            mlp_lr=self.mlp_lr,
            seed=self.random_state,
        )

    def fit(self, corpus: Corpus, supervision: Supervision) -> "OpenWorldTextClassifier":
        """Run refinement on `corpus` and train the final classifier."""
        result = run_refinement(
            corpus, supervision, config=self._config(), table=self.embedding_table
        )
        self.refinement_: RefinementResult = result
        self.table_: EmbeddingTable = result.table
        self.class_reps_ = result.class_reps
        self.class_words_ = {
            c.id: list(c.selected_class_words) for c in result.state.clusters
        }
        self.history_ = result.state.history
        self.classes_ = sorted(self.class_words_)
        if len(self.classes_) >= 2:
            self.classifier_: FinalClassifier | None = train_final_classifier(
                result.doc_reps,
                result.pseudo,
                epochs=self.classifier_epochs,
                lr=self.classifier_lr,
                seed=self.random_state,
            )
        else:
            self.classifier_ = None
        self.labels_ = self._predict_corpus(corpus)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "refinement_"):
            raise RuntimeError("this estimator is not fitted yet; call fit() first")

    def _predict_corpus(self, corpus: Corpus) -> dict[str, str]:
        fallback = self.classes_[0]
        out: dict[str, str] = {}
        reps = []
        rep_doc_ids = []
        for doc in corpus.documents:
            if any(t in self.table_ for t in doc.tokens):
                reps.append(
                    document_representation(doc, self.table_, self.class_reps_, tau=self.tau)
                )
                rep_doc_ids.append(doc.id)
            else:
                # No usable tokens: lexicographically first class, by convention.
                out[doc.id] = fallback
        if reps:
            if self.classifier_ is not None:
                out.update(classifier_predict(self.classifier_, reps))
            else:
                out.update({d: fallback for d in rep_doc_ids})
        return out

    def predict(self, corpus: Corpus | None = None) -> dict[str, str]:
        """Cluster id per document id; defaults to the fitted corpus's labels."""
        self._check_fitted()
        if corpus is None:
            return dict(self.labels_)
        return self._predict_corpus(corpus)

    def fit_predict(self, corpus: Corpus, supervision: Supervision) -> dict[str, str]:
        return self.fit(corpus, supervision).predict()

    def predicted_class_count(self) -> int:
        self._check_fitted()
        return len(set(self.labels_.values()))
