"""Head-to-head benchmark: the full engine pipeline vs. a plain GMM control.

Both sides consume vectors from the same encoder forward pass. The engine
side runs through the `openclass` command line (prepare -> run -> eval) with
the exported static word table; the control clusters raw mean-pooled document
vectors with a diagonal-covariance Gaussian mixture whose component count is
set to whatever the engine predicted, and is scored with the very same `eval`
command. The margin reported is engine macro-F1 minus control macro-F1.
"""

from __future__ import annotations

import json
import logging
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
from sklearn.mixture import GaussianMixture

from .exporter import compute_corpus_vectors, load_model, write_export
from .words import load_documents

__all__ = ["run_benchmark"]

logger = logging.getLogger(__name__)


def _engine_command() -> list[str]:
    exe = shutil.which("openclass")
    if exe:
        return [exe]
    return [sys.executable, "-m", "openclass.cli"]


def _run_engine(args: list[str]) -> str:
    cmd = _engine_command() + args
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        detail = (proc.stderr or proc.stdout).strip()
        raise RuntimeError(f"engine command `{' '.join(args[:1])}` failed: {detail}")
    return proc.stdout


def _write_tsv(predictions: dict[str, str], path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for doc_id in sorted(predictions):
            fh.write(f"{doc_id}\t{predictions[doc_id]}\n")


def _macro(report: dict) -> float:
    value = report["overall"]["macro_f1"]
    if value is None:
        raise ValueError("evaluation report has no overall macro-F1")
    return float(value)


def run_benchmark(
    corpus_path: str | Path,
    model_id: str,
    out_dir: str | Path,
    k: int = 40,
    w: int = 50,
    shots: int = 10,
    seen_fraction: float = 0.5,
    seed: int = 42,
    max_length: int = 512,
    batch_size: int = 16,
    device: str = "cpu",
) -> dict:
    """Run both sides on a labeled corpus and write `benchmark.json`.

    The corpus file must carry gold labels (the engine's `prepare` builds the
    few-shot split from them and `eval` scores against them). Returns the
    summary dict that is also written to disk.
    """
    corpus_path = Path(corpus_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    docs = load_documents(corpus_path)
    tokenizer, model = load_model(model_id, device=device)
    logger.info("encoding %d documents with %s", len(docs), model_id)
    vectors = compute_corpus_vectors(
        docs, tokenizer, model, max_length=max_length, batch_size=batch_size, device=device
    )
    table_path = out / "embeddings.wotemb"
    manifest = write_export(
        vectors.word_vectors,
        vectors.omitted_words,
        model_id,
        corpus_path,
        table_path,
        out / "embeddings.json",
        max_length,
        model.config.hidden_size,
    )

    _run_engine(
        [
            "prepare",
            "--corpus", str(corpus_path),
            "--out-dir", str(out),
            "--shots", str(shots),
            "--seen-fraction", str(seen_fraction),
            "--seed", str(seed),
        ]
    )
    supervision_path = out / "supervision.json"
    _run_engine(
        [
            "run",
            "--corpus", str(corpus_path),
            "--supervision", str(supervision_path),
            "--out-dir", str(out),
            "--embeddings", str(table_path),
            "--k", str(k),
            "--w", str(w),
            "--seed", str(seed),
        ]
    )
    engine_report_path = out / "report.json"
    _run_engine(
        [
            "eval",
            "--predictions", str(out / "predictions.tsv"),
            "--corpus", str(corpus_path),
            "--supervision", str(supervision_path),
            "--out", str(engine_report_path),
        ]
    )
    engine_report = json.loads(engine_report_path.read_text(encoding="utf-8"))
    components = int(engine_report["predicted_class_count"])

    doc_ids = sorted(vectors.doc_vectors)
    matrix = np.stack([vectors.doc_vectors[d] for d in doc_ids])
    logger.info("fitting %d-component control mixture", components)
    mixture = GaussianMixture(
        n_components=components, covariance_type="diag", random_state=seed
    )
    labels = mixture.fit_predict(matrix)
    control_predictions = {d: f"control{int(lbl)}" for d, lbl in zip(doc_ids, labels)}
    control_pred_path = out / "control_predictions.tsv"
    _write_tsv(control_predictions, control_pred_path)
    control_report_path = out / "control_report.json"
    _run_engine(
        [
            "eval",
            "--predictions", str(control_pred_path),
            "--corpus", str(corpus_path),
            "--supervision", str(supervision_path),
            "--out", str(control_report_path),
        ]
    )
    control_report = json.loads(control_report_path.read_text(encoding="utf-8"))

    engine_macro = _macro(engine_report)
    control_macro = _macro(control_report)
    summary = {
        "corpus": str(corpus_path),
        "model": str(model_id),
        "documents": len(docs),
        "table_sha256": manifest.sha256,
        "engine": {
            "macro_f1": engine_macro,
            "micro_f1": engine_report["overall"]["micro_f1"],
            "predicted_class_count": components,
            "report": str(engine_report_path),
        },
        "control": {
            "macro_f1": control_macro,
            "micro_f1": control_report["overall"]["micro_f1"],
            "components": components,
            "report": str(control_report_path),
        },
        "margin_macro_f1": engine_macro - control_macro,
    }
    (out / "benchmark.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary
