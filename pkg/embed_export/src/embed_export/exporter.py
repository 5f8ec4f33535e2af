"""Static word vectors from a masked language model's hidden states.

A word's static representation is the mean over all its corpus occurrences of
the occurrence vector; an occurrence vector is the mean of the final-layer
hidden states of the word's constituent sub-word pieces. Documents are
processed in sorted-id order, so nothing depends on the corpus file's document
order. One forward pass also yields a mean-pooled vector per document, which
the benchmark uses as its clustering control input.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch

from .manifest import ExportManifest
from .table import file_sha256, write_table
from .words import RawDocument, load_documents, word_spans

__all__ = [
    "CorpusVectors",
    "load_model",
    "compute_corpus_vectors",
    "compute_static_vectors",
    "compute_document_vectors",
    "write_export",
    "export_static_table",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusVectors:
    """Everything one forward pass over the corpus produces.

    `word_vectors` maps each encodable word to its float64 static vector,
    `omitted_words` lists corpus words with no encodable occurrence, and
    `doc_vectors` maps each document id to its mean-pooled float64 vector.
    """

    word_vectors: dict[str, np.ndarray]
    omitted_words: list[str]
    doc_vectors: dict[str, np.ndarray]


def load_model(model_id: str, device: str = "cpu"):
    """Tokenizer + encoder in eval mode. `model_id` is a hub id or local path."""
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    if not tokenizer.is_fast:
        raise ValueError(
            f"tokenizer for {model_id!r} has no fast backend; character offsets "
            f"are required to align words with sub-word pieces"
        )
    model = AutoModel.from_pretrained(model_id)
    model.to(device)
    model.eval()
    return tokenizer, model


def _batches(items: Sequence, size: int) -> Iterable[Sequence]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


def _encode(tokenizer, texts: list[str], max_length: int, device: str):
    enc = tokenizer(
        texts,
        truncation=True,
        max_length=max_length,
        padding=True,
        return_offsets_mapping=True,
        return_special_tokens_mask=True,
        return_tensors="pt",
    )
    offsets = enc.pop("offset_mapping")
    special = enc.pop("special_tokens_mask")
    model_inputs = {k: v.to(device) for k, v in enc.items()}
    return model_inputs, offsets, special


def _piece_rows(offsets_row, special_row, attention_row) -> list[tuple[int, int, int]]:
    """Content pieces of one sequence: (token index, char start, char end)."""
    rows = []
    for idx in range(len(special_row)):
        if int(attention_row[idx]) == 0 or int(special_row[idx]) == 1:
            continue
        start, end = int(offsets_row[idx][0]), int(offsets_row[idx][1])
        if end > start:
            rows.append((idx, start, end))
    return rows


def compute_corpus_vectors(
    docs: Sequence[RawDocument],
    tokenizer,
    model,
    max_length: int = 512,
    batch_size: int = 16,
    device: str = "cpu",
) -> CorpusVectors:
    """Run the encoder over the corpus once and aggregate its hidden states.

    A word occurrence contributes to the word's static vector only when all
    of its pieces survived truncation and none of them is the unknown token;
    words with no contributing occurrence anywhere end up in `omitted_words`.
    Document vectors average all content pieces; a document whose encoding
    has none gets a zero vector (with a warning).
    """
    if not docs:
        raise ValueError("no documents to encode")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    if max_length < 3:
        raise ValueError("max_length must leave room for at least one content piece")
    unk_id = tokenizer.unk_token_id
    dim = model.config.hidden_size
    ordered = sorted(docs, key=lambda d: d.id)
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    all_words: set[str] = set()
    doc_vectors: dict[str, np.ndarray] = {}
    for batch in _batches(ordered, batch_size):
        texts = [d.text for d in batch]
        model_inputs, offsets, special = _encode(tokenizer, texts, max_length, device)
        with torch.no_grad():
            hidden = model(**model_inputs).last_hidden_state.cpu().double().numpy()
        input_ids = model_inputs["input_ids"].cpu()
        attention = model_inputs["attention_mask"].cpu()
        for row, doc in enumerate(batch):
            pieces = _piece_rows(offsets[row], special[row], attention[row])
            vecs = hidden[row]
            if pieces:
                doc_vectors[doc.id] = vecs[[i for i, _, _ in pieces]].mean(axis=0)
            else:
                warnings.warn(
                    f"document {doc.id!r} has no content pieces; zero vector used",
                    stacklevel=2,
                )
                doc_vectors[doc.id] = np.zeros(dim)
            covered_end = max((end for _, _, end in pieces), default=0)
            for w_start, w_end, word in word_spans(doc.text):
                all_words.add(word)
                if w_end > covered_end:
                    continue  # fully or partially lost to truncation
                idx = [i for i, s, e in pieces if s >= w_start and e <= w_end]
                if not idx:
                    continue
                if any(int(input_ids[row, i]) == unk_id for i in idx):
                    continue
                occ = vecs[idx].mean(axis=0)
                if word in sums:
                    sums[word] += occ
                    counts[word] += 1
                else:
                    sums[word] = occ.copy()
                    counts[word] = 1
    word_vectors = {w: sums[w] / counts[w] for w in sums}
    omitted = sorted(all_words - set(word_vectors))
    return CorpusVectors(word_vectors, omitted, doc_vectors)


def compute_static_vectors(
    docs: Sequence[RawDocument],
    tokenizer,
    model,
    max_length: int = 512,
    batch_size: int = 16,
    device: str = "cpu",
) -> tuple[dict[str, np.ndarray], list[str]]:
    """Per-word static vectors over the corpus, plus the words left out."""
    result = compute_corpus_vectors(
        docs, tokenizer, model, max_length=max_length, batch_size=batch_size, device=device
    )
    return result.word_vectors, result.omitted_words


def compute_document_vectors(
    docs: Sequence[RawDocument],
    tokenizer,
    model,
    max_length: int = 512,
    batch_size: int = 16,
    device: str = "cpu",
) -> dict[str, np.ndarray]:
    """Mean-pooled final-layer vector per document (content pieces only)."""
    result = compute_corpus_vectors(
        docs, tokenizer, model, max_length=max_length, batch_size=batch_size, device=device
    )
    return result.doc_vectors


def write_export(
    word_vectors: dict[str, np.ndarray],
    omitted_words: Sequence[str],
    model_id: str,
    corpus_path: str | Path,
    out_path: str | Path,
    manifest_path: str | Path | None,
    max_length: int,
    dim: int,
) -> ExportManifest:
    """Serialize an already-computed table and describe it in a manifest."""
    if not word_vectors:
        raise ValueError(
            "no word in the corpus is encodable by this model; nothing to export"
        )
    out_path = Path(out_path)
    write_table(word_vectors, out_path)
    manifest = ExportManifest(
        model=str(model_id),
        corpus=str(corpus_path),
        case="lowercase",
        layer="final",
        max_length=max_length,
        dim=dim,
        vocab_size=len(word_vectors),
        omitted_words=sorted(omitted_words),
        sha256=file_sha256(out_path),
    )
    manifest.save(manifest_path or out_path.with_suffix(".json"))
    return manifest


def export_static_table(
    corpus_path: str | Path,
    model_id: str,
    out_path: str | Path,
    manifest_path: str | Path | None = None,
    max_length: int = 512,
    batch_size: int = 16,
    device: str = "cpu",
) -> ExportManifest:
    """Full export: corpus in, table file + manifest out."""
    docs = load_documents(corpus_path)
    tokenizer, model = load_model(model_id, device=device)
    logger.info("exporting %d documents with %s", len(docs), model_id)
    vectors, omitted = compute_static_vectors(
        docs, tokenizer, model, max_length=max_length, batch_size=batch_size, device=device
    )
    if omitted:
        logger.info("%d word(s) had no encodable occurrence", len(omitted))
    return write_export(
        vectors,
        omitted,
        model_id,
        corpus_path,
        out_path,
        manifest_path,
        max_length,
        model.config.hidden_size,
    )
