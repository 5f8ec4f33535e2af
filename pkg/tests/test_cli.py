"""End-to-end command-line workflows via click's test runner."""

from __future__ import annotations

import json
import math

import pytest
from click.testing import CliRunner

from openclass.cli import main
from openclass.corpus import load_corpus, load_supervision
from openclass.embedding import fallback_embeddings, write_embedding_table

from conftest import make_planted_corpus


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    corpus = make_planted_corpus(n_topics=4, docs_per_topic=50, seed=6)
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(
                json.dumps(
                    {"id": doc.id, "text": doc.raw_text, "label": doc.gold_label}
                )
                + "\n"
            )
    return path


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def invoke(runner, *args, **kwargs):
    result = runner.invoke(main, [str(a) for a in args], **kwargs)
    return result


class TestPrepare:
    def test_writes_supervision(self, runner, corpus_file, tmp_path):
        result = invoke(
            runner,
            "prepare",
            "--corpus", corpus_file,
            "--out-dir", tmp_path,
            "--shots", 5,
            "--seen-fraction", 0.5,
        )
        assert result.exit_code == 0, result.output
        sup = load_supervision(tmp_path / "supervision.json")
        assert len(sup.seen_class_names) == 2
        assert all(len(ids) == 5 for ids in sup.labeled_examples.values())
        assert "seen" in result.output and "unseen" in result.output

    def test_delta_writes_imbalanced_corpus(self, runner, corpus_file, tmp_path):
        result = invoke(
            runner,
            "prepare",
            "--corpus", corpus_file,
            "--out-dir", tmp_path,
            "--shots", 5,
            "--delta", 0.04,
        )
        assert result.exit_code == 0, result.output
        thinned = load_corpus(tmp_path / "corpus_imbalanced.jsonl")
        counts = sorted(thinned.class_counts().values(), reverse=True)
        expect = sorted(
            (math.floor(50 * (1 - k * 0.04)) for k in range(4)), reverse=True
        )
        assert counts == expect

    def test_missing_corpus_is_usage_error(self, runner, tmp_path):
        result = invoke(
            runner, "prepare", "--corpus", tmp_path / "nope.jsonl", "--out-dir", tmp_path
        )
        assert result.exit_code == 2

    def test_excessive_shots_fails_cleanly(self, runner, corpus_file, tmp_path):
        result = invoke(
            runner,
            "prepare",
            "--corpus", corpus_file,
            "--out-dir", tmp_path,
            "--shots", 10_000,
        )
        assert result.exit_code == 1
        assert "error:" in result.output


@pytest.fixture(scope="module")
def prepared(tmp_path_factory, corpus_file):
    out = tmp_path_factory.mktemp("prepared")
    result = CliRunner().invoke(
        main,
        [
            "prepare",
            "--corpus", str(corpus_file),
            "--out-dir", str(out),
            "--shots", "8",
        ],
    )
    assert result.exit_code == 0, result.output
    return out / "supervision.json"


RUN_FLAGS = ["--k", "10", "--w", "30", "--embedding-dim", "32"]


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, corpus_file, prepared):
    out = tmp_path_factory.mktemp("run")
    result = CliRunner().invoke(
        main,
        [
            "run",
            "--corpus", str(corpus_file),
            "--supervision", str(prepared),
            "--out-dir", str(out),
            *RUN_FLAGS,
        ],
    )
    assert result.exit_code == 0, result.output
    return out


class TestRun:
    def test_writes_artifacts(self, run_dir):
        assert (run_dir / "predictions.tsv").exists()
        assert (run_dir / "class_words.json").exists()
        assert (run_dir / "history.json").exists()
        words = json.loads((run_dir / "class_words.json").read_text())
        assert words and all(isinstance(v, list) and v for v in words.values())
        history = json.loads((run_dir / "history.json").read_text())
        assert history[0]["event"] == "pass"
        assert history[0]["clusters_before"] == 10

    def test_rerun_is_byte_identical(self, runner, corpus_file, prepared, run_dir, tmp_path):
        result = invoke(
            runner,
            "run",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out-dir", tmp_path,
            *RUN_FLAGS,
        )
        assert result.exit_code == 0, result.output
        for name in ("predictions.tsv", "class_words.json", "history.json"):
            assert (tmp_path / name).read_bytes() == (run_dir / name).read_bytes()

    def test_prebuilt_embeddings_accepted(
        self, runner, corpus_file, prepared, tmp_path
    ):
        corpus = load_corpus(corpus_file)
        table = fallback_embeddings(corpus, dim=24, seed=1)
        emb_path = tmp_path / "table.bin"
        write_embedding_table(table, emb_path)
        result = invoke(
            runner,
            "run",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out-dir", tmp_path,
            "--embeddings", emb_path,
            *RUN_FLAGS,
        )
        assert result.exit_code == 0, result.output

    def test_config_file_with_flag_precedence(
        self, runner, corpus_file, prepared, tmp_path
    ):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"k": 12, "w": 30, "embedding_dim": 32}))
        result = invoke(
            runner,
            "run",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out-dir", tmp_path,
            "--config", config,
            "--k", 9,
        )
        assert result.exit_code == 0, result.output
        history = json.loads((tmp_path / "history.json").read_text())
        assert history[0]["clusters_before"] == 9

    def test_unknown_config_key_fails(self, runner, corpus_file, prepared, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"mystery_knob": 3}))
        result = invoke(
            runner,
            "run",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out-dir", tmp_path,
            "--config", config,
        )
        assert result.exit_code == 1
        assert "mystery_knob" in result.output

    def test_k_below_seen_count_is_runtime_error(
        self, runner, corpus_file, prepared, tmp_path
    ):
        result = invoke(
            runner,
            "run",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out-dir", tmp_path,
            "--k", 1,
        )
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_missing_required_option_is_usage_error(self, runner, corpus_file):
        result = invoke(runner, "run", "--corpus", corpus_file)
        assert result.exit_code == 2


class TestEval:
    def test_report_written_and_printed(self, runner, corpus_file, prepared, run_dir):
        result = invoke(
            runner,
            "eval",
            "--predictions", run_dir / "predictions.tsv",
            "--corpus", corpus_file,
            "--supervision", prepared,
        )
        assert result.exit_code == 0, result.output
        report = json.loads((run_dir / "report.json").read_text())
        assert 0.0 <= report["overall"]["micro_f1"] <= 1.0
        assert report["overall"]["micro_f1"] >= 0.9
        assert "overall" in result.output and "unseen" in result.output

    def test_custom_out_path(self, runner, corpus_file, prepared, run_dir, tmp_path):
        target = tmp_path / "scores.json"
        result = invoke(
            runner,
            "eval",
            "--predictions", run_dir / "predictions.tsv",
            "--corpus", corpus_file,
            "--supervision", prepared,
            "--out", target,
        )
        assert result.exit_code == 0, result.output
        assert target.exists()

    def test_id_mismatch_fails(self, runner, corpus_file, prepared, tmp_path):
        preds = tmp_path / "preds.tsv"
        preds.write_text("unknowndoc\tc000\n")
        result = invoke(
            runner,
            "eval",
            "--predictions", preds,
            "--corpus", corpus_file,
            "--supervision", prepared,
        )
        assert result.exit_code == 1
        assert "disagree" in result.output


class TestReport:
    def test_prints_pass_table(self, runner, run_dir):
        result = invoke(runner, "report", "--run-dir", run_dir)
        assert result.exit_code == 0, result.output
        assert "pass" in result.output
        assert "final clusters:" in result.output

    def test_missing_history_fails(self, runner, tmp_path):
        result = invoke(runner, "report", "--run-dir", tmp_path)
        assert result.exit_code == 1
        assert "history.json" in result.output


def test_version_flag(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0
    assert "0.1.0" in result.output
