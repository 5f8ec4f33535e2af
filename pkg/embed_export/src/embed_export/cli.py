"""Command-line interface: export tables, verify them, build data, benchmark."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .benchmark import run_benchmark
from .datasets import fetch_20news_subset
from .exporter import export_static_table
from .manifest import load_manifest, verify_table

_RUNTIME_ERRORS = (ValueError, RuntimeError, KeyError, OSError)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="embed-export")
def main() -> None:
    """Export transformer word vectors into the engine's table format."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_id", required=True, help="Model hub id or local model directory.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--manifest", "manifest_path", default=None, type=click.Path(dir_okay=False), help="Manifest location (default: table path with .json suffix).")
@click.option("--max-length", default=512, show_default=True, type=int)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--device", default="cpu", show_default=True)
def export(corpus_path, model_id, out_path, manifest_path, max_length, batch_size, device):
    """Write a static word-vector table plus its manifest."""
    try:
        manifest = export_static_table(
            corpus_path,
            model_id,
            out_path,
            manifest_path=manifest_path,
            max_length=max_length,
            batch_size=batch_size,
            device=device,
        )
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"wrote {out_path} ({manifest.vocab_size} words, dim {manifest.dim})")
    if manifest.omitted_words:
        click.echo(f"{len(manifest.omitted_words)} word(s) had no encodable occurrence")
    click.echo(f"sha256 {manifest.sha256}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Table file (default: manifest path with .wotemb suffix).")
def verify(manifest_path, table_path):
    """Check a table file against its manifest (checksum, dim, vocab size)."""
    try:
        manifest = load_manifest(manifest_path)
        target = Path(table_path) if table_path else Path(manifest_path).with_suffix(".wotemb")
        verify_table(manifest, target)
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"{target} matches its manifest ({manifest.vocab_size} words, dim {manifest.dim})")


@main.command("fetch-20news")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--per-class", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--data-home", default=None, type=click.Path(file_okay=False), help="scikit-learn data cache directory.")
@click.option("--max-words", default=256, show_default=True, type=int, help="Per-document word cap, keeps text inside the encoder window.")
@click.option("--max-word-chars", default=30, show_default=True, type=int)
def fetch_20news(out_path, per_class, seed, data_home, max_words, max_word_chars):
    """Write a stratified 20 Newsgroups subsample as a labeled JSONL corpus."""
    try:
        path = fetch_20news_subset(
            out_path,
            per_class=per_class,
            seed=seed,
            data_home=data_home,
            max_words=max_words,
            max_word_chars=max_word_chars,
        )
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"wrote {path} (20 groups x {per_class} documents)")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_id", required=True, help="Model hub id or local model directory.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--k", default=40, show_default=True, type=int, help="Engine's initial class-count overestimate.")
@click.option("--w", default=50, show_default=True, type=int)
@click.option("--shots", default=10, show_default=True, type=int)
@click.option("--seen-fraction", default=0.5, show_default=True, type=float)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--max-length", default=512, show_default=True, type=int)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--device", default="cpu", show_default=True)
def benchmark(corpus_path, model_id, out_dir, k, w, shots, seen_fraction, seed, max_length, batch_size, device):
    """Run the engine and the GMM control on one corpus and compare macro-F1."""
    try:
        summary = run_benchmark(
            corpus_path,
            model_id,
            out_dir,
            k=k,
            w=w,
            shots=shots,
            seen_fraction=seen_fraction,
            seed=seed,
            max_length=max_length,
            batch_size=batch_size,
            device=device,
        )
    except _RUNTIME_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"{'side':<10} {'macro-F1':>9} {'classes':>8}")
    click.echo(
        f"{'engine':<10} {100 * summary['engine']['macro_f1']:>9.2f} "
        f"{summary['engine']['predicted_class_count']:>8}"
    )
    click.echo(
        f"{'control':<10} {100 * summary['control']['macro_f1']:>9.2f} "
        f"{summary['control']['components']:>8}"
    )
    click.echo(f"margin: {100 * summary['margin_macro_f1']:+.2f} points")
    click.echo(f"details in {Path(out_dir) / 'benchmark.json'}")


if __name__ == "__main__":
    main()
