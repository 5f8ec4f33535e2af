"""Gaussian mixture pseudo-labeling and the final linear classifier."""

from __future__ import annotations

import numpy as np
import pytest

from openclass.embedding import ClassRep, DocRep
from openclass.mixture import (
    FinalClassifier,
    cluster_documents,
    predict,
    read_predictions,
    train_final_classifier,
    write_predictions,
)


def blob_data(seed=0, per=40, centers=((0.0, 0.0), (10.0, 0.0), (0.0, 10.0))):
    rng = np.random.default_rng(seed)
    doc_reps = []
    truth = {}
    for ci, c in enumerate(centers):
        pts = rng.normal(loc=c, scale=0.5, size=(per, len(c)))
        for i, p in enumerate(pts):
            did = f"d{ci}_{i:03d}"
            doc_reps.append(DocRep(doc_id=did, vector=p))
            truth[did] = ci
    return doc_reps, truth


def class_reps_at(**centers) -> list[ClassRep]:
    return [
        ClassRep(class_id=cid, vector=np.asarray(v, dtype=float))
        for cid, v in centers.items()
    ]


THREE_CENTERS = {"a": [0.5, -0.5], "b": [9.0, 1.0], "c": [1.0, 9.0]}


class TestClusterDocuments:
    def test_recovers_well_separated_blobs(self):
        doc_reps, truth = blob_data()
        model, pseudo = cluster_documents(doc_reps, class_reps_at(**THREE_CENTERS))
        groups = pseudo.members()
        assert len(groups) == 3
        for ids in groups.values():
            assert len({truth[d] for d in ids}) == 1
        assert model.converged
        assert not model.empty_components

    def test_posterior_is_max_responsibility(self):
        doc_reps, _ = blob_data(seed=1)
        _, pseudo = cluster_documents(doc_reps, class_reps_at(**THREE_CENTERS))
        for doc_id, conf in pseudo.posterior.items():
            assert 1.0 / 3.0 - 1e-12 <= conf <= 1.0
        # Well-separated blobs: nearly all docs should be confident.
        confident = sum(1 for c in pseudo.posterior.values() if c > 0.99)
        assert confident >= 0.95 * len(pseudo.posterior)

    def test_single_component_gets_everything(self):
        doc_reps, _ = blob_data(seed=2, centers=((0.0, 0.0),))
        model, pseudo = cluster_documents(doc_reps, class_reps_at(only=[0.1, 0.2]))
        assert set(pseudo.assignment.values()) == {"only"}
        for conf in pseudo.posterior.values():
            assert conf == pytest.approx(1.0, abs=1e-12)

    def test_pins_override_geometry(self):
        doc_reps, truth = blob_data(seed=3)
        pinned_doc = next(dr.doc_id for dr in doc_reps if truth[dr.doc_id] == 2)
        _, pseudo = cluster_documents(
            doc_reps, class_reps_at(**THREE_CENTERS), pins={pinned_doc: "a"}
        )
        assert pseudo.assignment[pinned_doc] == "a"
        assert pseudo.posterior[pinned_doc] == 1.0

    def test_log_likelihood_non_decreasing(self):
        rng = np.random.default_rng(4)
        doc_reps = [DocRep(f"d{i}", rng.normal(size=3)) for i in range(120)]
        creps = [ClassRep(f"c{i}", rng.normal(size=3)) for i in range(6)]
        model, _ = cluster_documents(doc_reps, creps)
        lls = model.log_likelihoods
        assert len(lls) >= 2
        for prev, curr in zip(lls, lls[1:]):
            assert curr >= prev - 1e-9 * max(1.0, abs(prev))

    def test_deterministic(self):
        doc_reps, _ = blob_data(seed=5)
        m1, p1 = cluster_documents(doc_reps, class_reps_at(**THREE_CENTERS))
        m2, p2 = cluster_documents(doc_reps, class_reps_at(**THREE_CENTERS))
        assert np.array_equal(m1.means, m2.means)
        assert p1.assignment == p2.assignment

    def test_empty_component_reported(self):
        rng = np.random.default_rng(6)
        doc_reps = [DocRep(f"d{i}", rng.normal(size=2, scale=0.1)) for i in range(60)]
        creps = class_reps_at(near=[0.0, 0.0], far=[1e6, 1e6])
        model, pseudo = cluster_documents(doc_reps, creps)
        assert "far" in model.empty_components
        assert set(pseudo.assignment.values()) == {"near"}

    def test_validation_errors(self):
        one_doc = [DocRep("d", np.zeros(2))]
        one_class = class_reps_at(a=[0.0, 0.0])
        with pytest.raises(ValueError, match="document"):
            cluster_documents([], one_class)
        with pytest.raises(ValueError, match="class"):
            cluster_documents(one_doc, [])
        with pytest.raises(ValueError, match="duplicate"):
            cluster_documents(one_doc + one_doc, one_class)
        with pytest.raises(ValueError, match="pin"):
            cluster_documents(one_doc, one_class, pins={"ghost": "a"})
        with pytest.raises(ValueError, match="pin"):
            cluster_documents(one_doc, one_class, pins={"d": "nope"})


def pseudo_of(labels: dict[str, str]):
    from openclass.mixture import PseudoLabeling

    return PseudoLabeling(assignment=dict(labels), posterior={d: 1.0 for d in labels})


class TestFinalClassifier:
    def test_separable_training(self):
        doc_reps, truth = blob_data(seed=7)
        names = ["alpha", "beta", "gamma"]
        labels = {dr.doc_id: names[truth[dr.doc_id]] for dr in doc_reps}
        clf = train_final_classifier(doc_reps, pseudo_of(labels))
        preds = predict(clf, doc_reps)
        acc = sum(1 for d, c in preds.items() if c == labels[d]) / len(labels)
        assert acc >= 0.99

    def test_classes_sorted(self):
        doc_reps, truth = blob_data(seed=8)
        labels = {dr.doc_id: ["zeta", "alpha", "mid"][truth[dr.doc_id]] for dr in doc_reps}
        clf = train_final_classifier(doc_reps, pseudo_of(labels))
        assert clf.classes == ["alpha", "mid", "zeta"]

    def test_zero_weights_predict_first_class(self):
        clf = FinalClassifier(
            classes=["aaa", "bbb"], coef=np.zeros((3, 2)), intercept=np.zeros(2)
        )
        out = predict(clf, [DocRep("d1", np.array([1.0, 2.0, 3.0]))])
        assert out["d1"] == "aaa"

    def test_indistinguishable_classes_near_chance(self):
        rng = np.random.default_rng(9)
        train = [DocRep(f"d{i:03d}", rng.normal(size=4)) for i in range(200)]
        labels = {dr.doc_id: ("x" if i % 2 == 0 else "y") for i, dr in enumerate(train)}
        clf = train_final_classifier(train, pseudo_of(labels))
        held = [DocRep(f"h{i:03d}", rng.normal(size=4)) for i in range(400)]
        preds = predict(clf, held)
        frac_x = sum(1 for v in preds.values() if v == "x") / len(held)
        assert 0.3 <= frac_x <= 0.7

    def test_unlabeled_docs_ignored_for_training(self):
        doc_reps, truth = blob_data(seed=10)
        labels = {
            dr.doc_id: ["a", "b", "c"][truth[dr.doc_id]]
            for dr in doc_reps
            if not dr.doc_id.endswith("5")
        }
        clf = train_final_classifier(doc_reps, pseudo_of(labels))
        assert set(clf.classes) == {"a", "b", "c"}

    def test_single_class_errors(self):
        with pytest.raises(ValueError, match="two"):
            train_final_classifier(
                [DocRep("d", np.zeros(2))], pseudo_of({"d": "only"})
            )

    def test_no_overlap_errors(self):
        with pytest.raises(ValueError, match="matches"):
            train_final_classifier(
                [DocRep("d", np.zeros(2))], pseudo_of({"other": "a", "more": "b"})
            )

    def test_dim_mismatch_errors(self):
        doc_reps, truth = blob_data(seed=11)
        labels = {dr.doc_id: ["a", "b", "c"][truth[dr.doc_id]] for dr in doc_reps}
        clf = train_final_classifier(doc_reps, pseudo_of(labels))
        with pytest.raises(ValueError, match="dim"):
            predict(clf, [DocRep("q", np.zeros(5))])

    def test_predict_empty_input(self):
        clf = FinalClassifier(classes=["a", "b"], coef=np.zeros((2, 2)), intercept=np.zeros(2))
        assert predict(clf, []) == {}


class TestPredictionsIO:
    def test_round_trip_sorted(self, tmp_path):
        path = tmp_path / "preds.tsv"
        preds = {"z9": "classa", "a1": "classb", "m5": "classa"}
        write_predictions(preds, path)
        lines = path.read_text().splitlines()
        assert lines == ["a1\tclassb", "m5\tclassa", "z9\tclassa"]
        assert read_predictions(path) == preds

    def test_malformed_line_errors(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a1\tx\textra\n")
        with pytest.raises(ValueError, match="line 1"):
            read_predictions(path)

    def test_duplicate_id_errors(self, tmp_path):
        path = tmp_path / "dup.tsv"
        path.write_text("a1\tx\na1\ty\n")
        with pytest.raises(ValueError, match="duplicate"):
            read_predictions(path)

    def test_empty_errors(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        with pytest.raises(ValueError, match="no predictions"):
            read_predictions(path)
