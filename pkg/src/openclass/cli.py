"""Command-line interface: prepare splits, run the pipeline, evaluate, report."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus import (
    load_corpus,
    load_supervision,
    make_imbalanced,
    make_open_world_split,
    save_supervision,
)
from .embedding import load_embedding_table
from .estimator import OpenWorldTextClassifier
from .evaluation import assign_clusters, f1_report, overlap_matrix
from .mixture import read_predictions, write_predictions
from .refine import RefineConfig

_RUNTIME_ERRORS = (ValueError, RuntimeError, KeyError, OSError)

_CONFIG_FIELDS = {
    "k": int,
    "w": int,
    "beta": float,
    "tau": float,
    "t_cap": int,
    "top_m": int,
    "embedding_dim": int,
    "embedding_window": int,
    "mlp_hidden": int,
    "mlp_epochs": int,
    "mlp_lr": float,
    "seed": int,
}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="openclass")
def main() -> None:
    """Open-world text classification: discover, name and label classes."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", envvar="OPENCLASS_OUTPUT", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--shots", default=10, show_default=True, type=int)
@click.option("--seen-fraction", default=0.5, show_default=True, type=float)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--delta", default=0.0, show_default=True, type=float, help="Linear class-thinning step; 0 keeps the corpus balanced as-is.")
@click.option("--class-order-seed", default=7, show_default=True, type=int)
def prepare(corpus_path, out_dir, shots, seen_fraction, seed, delta, class_order_seed):
    """Build the open-world split (and optionally an imbalanced corpus)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        corpus = load_corpus(corpus_path)
        if delta > 0:
            corpus = make_imbalanced(corpus, delta, class_order_seed=class_order_seed)
            imb_path = out / "corpus_imbalanced.jsonl"
            with imb_path.open("w", encoding="utf-8") as fh:
                for doc in corpus.documents:
                    fh.write(
                        json.dumps(
                            {"id": doc.id, "text": doc.raw_text, "label": doc.gold_label},
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
            click.echo(f"wrote {imb_path} ({corpus.num_docs} documents)")
        supervision = make_open_world_split(
            corpus, seen_fraction=seen_fraction, shots=shots, seed=seed
        )
        sup_path = out / "supervision.json"
        save_supervision(supervision, sup_path)
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    counts = corpus.class_counts()
    seen = set(supervision.seen_labels)
    click.echo(f"wrote {sup_path}")
    click.echo(f"{'class':<30} {'docs':>8}  status")
    for cls in sorted(counts, key=lambda c: (-counts[c], c)):
        status = "seen" if cls in seen else "unseen"
        click.echo(f"{cls:<30} {counts[cls]:>8}  {status}")
    click.echo(
        f"{len(counts)} classes, {corpus.num_docs} documents, "
        f"{len(seen)} seen x {shots} shots"
    )


def _resolve_config(config_path: str | None, overrides: dict) -> RefineConfig:
    values: dict = {}
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config file {config_path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ValueError(f"config file {config_path} must hold a JSON object")
        unknown = sorted(set(raw) - set(_CONFIG_FIELDS))
        if unknown:
            raise ValueError(f"unknown config key(s) in {config_path}: {unknown}")
        for key, val in raw.items():
            values[key] = _CONFIG_FIELDS[key](val)
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    return RefineConfig(**values)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--supervision", "supervision_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", envvar="OPENCLASS_OUTPUT", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False), help="JSON file with configuration fields; flags override it.")
@click.option("--embeddings", "embeddings_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Binary embedding table; omit to train fallback embeddings on the corpus.")
@click.option("--k", default=None, type=int, help="Initial class count overestimate.")
@click.option("--w", default=None, type=int, help="Representative words per cluster.")
@click.option("--beta", default=None, type=float, help="Class-word score cutoff ratio.")
@click.option("--tau", default=None, type=float, help="Attention temperature for document representations.")
@click.option("--t-cap", default=None, type=int, help="Upper bound on class-words selected per cluster.")
@click.option("--top-m", default=None, type=int, help="Statistical words per cluster merged into the candidate pool.")
@click.option("--embedding-dim", default=None, type=int)
@click.option("--embedding-window", default=None, type=int)
@click.option("--mlp-hidden", default=None, type=int)
@click.option("--mlp-epochs", default=None, type=int)
@click.option("--mlp-lr", default=None, type=float)
@click.option("--seed", default=None, type=int)
def run(corpus_path, supervision_path, out_dir, config_path, embeddings_path, **overrides):
    """Run the full pipeline and write predictions, class-words and history."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = _resolve_config(config_path, overrides)
        config.validate()
        corpus = load_corpus(corpus_path)
        supervision = load_supervision(supervision_path)
        table = load_embedding_table(embeddings_path) if embeddings_path else None
        clf = OpenWorldTextClassifier(
            k=config.k,
            w=config.w,
            beta=config.beta,
            tau=config.tau,
            t_cap=config.t_cap,
            top_m=config.top_m,
            embedding_dim=config.embedding_dim,
            embedding_window=config.embedding_window,
            mlp_hidden=config.mlp_hidden,
            mlp_epochs=config.mlp_epochs,
            mlp_lr=config.mlp_lr,
            random_state=config.seed,
            embedding_table=table,
        )
        clf.fit(corpus, supervision)
        predictions = clf.predict()
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    pred_path = out / "predictions.tsv"
    write_predictions(predictions, pred_path)
    words_path = out / "class_words.json"
    words_path.write_text(
        json.dumps(clf.class_words_, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    history_path = out / "history.json"
    history_path.write_text(
        json.dumps(clf.history_, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote {pred_path}, {words_path}, {history_path}")
    click.echo(
        f"{clf.predicted_class_count()} classes predicted over "
        f"{corpus.num_docs} documents in {clf.history_[-1]['iteration']} pass(es)"
    )


@main.command("eval")
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--supervision", "supervision_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Where to write the JSON report (default: report.json next to the predictions).")
def eval_cmd(predictions_path, corpus_path, supervision_path, out_path):
    """Score predictions against gold labels with cluster-to-class matching."""
    try:
        predictions = read_predictions(predictions_path)
        corpus = load_corpus(corpus_path)
        supervision = load_supervision(supervision_path)
        corpus.require_labels()
        gold = {d.id: d.gold_label for d in corpus.documents}
        missing = sorted(set(gold) - set(predictions))
        extra = sorted(set(predictions) - set(gold))
        if missing or extra:
            raise ValueError(
                f"predictions and corpus disagree on document ids "
                f"(missing from predictions: {missing[:5]}; unknown ids: {extra[:5]})"
            )
        matrix = overlap_matrix(predictions, gold)
        assignment = assign_clusters(matrix)
        report = f1_report(
            assignment, predictions, gold, seen_classes=supervision.seen_labels
        )
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    target = Path(out_path) if out_path else Path(predictions_path).parent / "report.json"
    target.write_text(report.to_json() + "\n", encoding="utf-8")
    click.echo(f"wrote {target}")

    def fmt(v: float | None) -> str:
        return "    -" if v is None else f"{100 * v:5.2f}"

    click.echo(f"{'subset':<10} {'micro-F1':>9} {'macro-F1':>9}")
    for label, sub in (
        ("overall", report.overall),
        ("seen", report.seen),
        ("unseen", report.unseen),
    ):
        click.echo(f"{label:<10} {fmt(sub.micro_f1):>9} {fmt(sub.macro_f1):>9}")
    click.echo(f"predicted classes: {report.predicted_class_count}")


@main.command()
@click.option("--run-dir", default=".", show_default=True, envvar="OPENCLASS_OUTPUT", type=click.Path(exists=True, file_okay=False))
def report(run_dir):
    """Summarize a finished run's per-iteration history."""
    history_path = Path(run_dir) / "history.json"
    if not history_path.exists():
        _fail(f"no history.json in {run_dir}; run the pipeline first")
    try:
        history = json.loads(history_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        _fail(f"{history_path}: malformed JSON: {exc}")
    click.echo(f"{'pass':>4} {'clusters':>9} {'emptied':>8} {'removed':>8}")
    for entry in history:
        if entry.get("event") != "pass":
            continue
        iteration = entry["iteration"]
        removal = next(
            (
                h
                for h in history
                if h.get("event") == "removal" and h.get("iteration") == iteration
            ),
            None,
        )
        removed = len(removal["removed"]) if removal else 0
        click.echo(
            f"{iteration:>4} {entry['clusters_before']:>9} "
            f"{len(entry['emptied']):>8} {removed:>8}"
        )
    words_path = Path(run_dir) / "class_words.json"
    if words_path.exists():
        words = json.loads(words_path.read_text(encoding="utf-8"))
        click.echo(f"final clusters: {len(words)}")
        for cid in sorted(words):
            click.echo(f"  {cid}: {', '.join(words[cid])}")


if __name__ == "__main__":
    main()
