"""Static word-vector export from pre-trained masked language models.

Turns a corpus plus an encoder into a binary embedding table the
classification engine can import: each word's vector is the average of its
contextual representations over every occurrence, multi-piece words averaging
their constituent pieces first. Ships with a manifest format for integrity
checks, a stratified 20 Newsgroups subsample builder, and a benchmark that
pits the engine against a Gaussian-mixture control on the same vectors.
"""

from .benchmark import run_benchmark
from .datasets import GROUP_LABELS, fetch_20news_subset
from .exporter import (
    CorpusVectors,
    compute_corpus_vectors,
    compute_document_vectors,
    compute_static_vectors,
    export_static_table,
    load_model,
    write_export,
)
from .manifest import ExportManifest, load_manifest, verify_table
from .table import MAGIC, file_sha256, write_table
from .words import RawDocument, load_documents, tokenize, word_spans

__version__ = "0.1.0"

__all__ = [
    "CorpusVectors",
    "ExportManifest",
    "GROUP_LABELS",
    "MAGIC",
    "RawDocument",
    "compute_corpus_vectors",
    "compute_document_vectors",
    "compute_static_vectors",
    "export_static_table",
    "fetch_20news_subset",
    "file_sha256",
    "load_documents",
    "load_manifest",
    "load_model",
    "run_benchmark",
    "tokenize",
    "verify_table",
    "word_spans",
    "write_export",
    "write_table",
    "__version__",
]
