"""Static word vectors, class and document representations.

Word vectors either come from an exported table file (see `load_embedding_table`)
or are trained on the corpus itself via PPMI + truncated SVD when no table is
available. Document representations attend over tokens by their best cosine
against the current class representations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from sklearn.utils.extmath import randomized_svd

from .corpus import Corpus, Document
from .validation import unit_normalize

__all__ = [
    "EmbeddingTable",
    "ClassRep",
    "DocRep",
    "average_contextual",
    "fallback_embeddings",
    "class_representation",
    "document_representation",
    "load_embedding_table",
    "write_embedding_table",
    "TABLE_MAGIC",
]

TABLE_MAGIC = "WOTEMB1"


class EmbeddingTable:
    """Immutable word -> vector map with consistent dimensionality.

    Rejects non-finite vectors, zero vectors and dimension mismatches at
    construction time so downstream geometry never has to re-check.
    """

    def __init__(self, vectors: Mapping[str, np.ndarray], source: str = "imported"):
        if source not in ("imported", "fallback"):
            raise ValueError(f"source must be 'imported' or 'fallback', got {source!r}")
        if not vectors:
            raise ValueError("embedding table is empty")
        store: dict[str, np.ndarray] = {}
        dim: int | None = None
        for word, vec in vectors.items():
            arr = np.asarray(vec)
            if arr.ndim != 1:
                raise ValueError(f"vector for {word!r} is not 1-D (shape {arr.shape})")
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape[0] != dim:
                raise ValueError(
                    f"vector for {word!r} has dim {arr.shape[0]}, expected {dim}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"vector for {word!r} contains non-finite values")
            if float(np.linalg.norm(arr)) < 1e-12:
                raise ValueError(f"vector for {word!r} has zero norm")
            arr = arr.copy()
            arr.setflags(write=False)
            store[word] = arr
        self._vectors = store
        self.dim = int(dim)  # type: ignore[arg-type]
        self.source = source
        self._words: list[str] | None = None

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def __getitem__(self, word: str) -> np.ndarray:
        try:
            return self._vectors[word]
        except KeyError:
            raise KeyError(f"word {word!r} not in embedding table") from None

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def words(self) -> list[str]:
        if self._words is None:
            self._words = sorted(self._vectors)
        return self._words

    def lookup(self, words: Sequence[str], unit: bool = False) -> np.ndarray:
        """Stack vectors for `words` into an (n, dim) float64 matrix."""
        out = np.empty((len(words), self.dim), dtype=np.float64)
        for i, w in enumerate(words):
            out[i] = self[w]
        if unit:
            out = out / np.linalg.norm(out, axis=1, keepdims=True)
        return out


@dataclass(frozen=True)
class ClassRep:
    """Unit-norm representation of one (tentative) class."""

    class_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class DocRep:
    """Unit-norm class-attentive representation of one document."""

    doc_id: str
    vector: np.ndarray


def average_contextual(
    occurrences: Iterable[tuple[str, Sequence[float]]],
) -> EmbeddingTable:
    """Average per-occurrence contextual vectors into one static vector per word.

    The mean uses correctly rounded per-dimension sums, so the result is exactly
    invariant under permutation of the occurrence stream.
    """
    per_word: dict[str, list[np.ndarray]] = {}
    dim: int | None = None
    for word, vec in occurrences:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"occurrence vector for {word!r} is not 1-D")
        if dim is None:
            dim = arr.shape[0]
        elif arr.shape[0] != dim:
            raise ValueError(
                f"occurrence vector for {word!r} has dim {arr.shape[0]}, expected {dim}"
            )
        per_word.setdefault(word, []).append(arr)
    if not per_word:
        raise ValueError("occurrence stream is empty")
    means: dict[str, np.ndarray] = {}
    for word, vecs in per_word.items():
        stacked = np.stack(vecs, axis=0)
        mean = np.array(
            [math.fsum(stacked[:, d]) / len(vecs) for d in range(stacked.shape[1])]
        )
        if float(np.linalg.norm(mean)) < 1e-12:
            warnings.warn(
                f"word {word!r} averaged to a zero vector; dropped from the table",
                stacklevel=2,
            )
            continue
        means[word] = mean
    return EmbeddingTable(means, source="imported")


def _cooccurrence_counts(corpus: Corpus, index: dict[str, int], window: int) -> sparse.csr_matrix:
    rows: list[int] = []
    cols: list[int] = []
    for doc in corpus.documents:
        ids = [index[t] for t in doc.tokens]
        n = len(ids)
        for i in range(n):
            hi = min(n, i + 1 + window)
            for j in range(i + 1, hi):
                rows.append(ids[i])
                cols.append(ids[j])
    v = len(index)
    data = np.ones(len(rows), dtype=np.float64)
    upper = sparse.coo_matrix((data, (rows, cols)), shape=(v, v))
    counts = (upper + upper.T).tocsr()
    counts.sum_duplicates()
    return counts


def fallback_embeddings(
    corpus: Corpus, dim: int = 64, window: int = 5, seed: int = 0
) -> EmbeddingTable:
    """Train corpus-local word vectors: PPMI co-occurrence + truncated SVD.

    Rows are L2-normalized; words whose PPMI row is all zero are dropped with
    a warning. Deterministic given the seed.
    """
    words = sorted(corpus.vocab)
    if len(words) < dim:
        raise ValueError(
            f"vocabulary has {len(words)} words, fewer than dim={dim}; "
            f"lower the embedding dimension"
        )
    index = {w: i for i, w in enumerate(words)}
    counts = _cooccurrence_counts(corpus, index, window)
    total = counts.sum()
    if total == 0:
        raise ValueError("no co-occurrence pairs; corpus documents are too short")
    row_sums = np.asarray(counts.sum(axis=1)).ravel()
    coo = counts.tocoo()
    # PMI over nonzero cells only; negatives clipped to zero (PPMI).
    denom = row_sums[coo.row] * row_sums[coo.col]
    with np.errstate(divide="ignore"):
        pmi = np.log(coo.data * total / denom)
    keep = pmi > 0
    ppmi = sparse.csr_matrix(
        (pmi[keep], (coo.row[keep], coo.col[keep])), shape=counts.shape
    )
    u, s, _ = randomized_svd(ppmi, n_components=dim, n_iter=7, random_state=seed)
    emb = u * np.sqrt(s)
    norms = np.linalg.norm(emb, axis=1)
    vectors: dict[str, np.ndarray] = {}
    dropped = []
    for w, i in index.items():
        if norms[i] < 1e-12:
            dropped.append(w)
            continue
        vectors[w] = emb[i] / norms[i]
    if dropped:
        warnings.warn(
            f"{len(dropped)} word(s) had empty co-occurrence rows and were "
            f"dropped from the fallback table (first: {dropped[:5]})",
            stacklevel=2,
        )
    if not vectors:
        raise ValueError("fallback embedding produced no usable vectors")
    return EmbeddingTable(vectors, source="fallback")


def class_representation(
    class_words: Sequence[str], table: EmbeddingTable, class_id: str | None = None
) -> ClassRep:
    """Unit-normalized mean of the class-word vectors.

    Out-of-vocabulary words are skipped with a warning; all words missing is
    an error.
    """
    if not class_words:
        raise ValueError("class has no class-words")
    present = [w for w in class_words if w in table]
    missing = [w for w in class_words if w not in table]
    if missing:
        warnings.warn(
            f"class-word(s) missing from embedding table, skipped: {missing}",
            stacklevel=2,
        )
    if not present:
        raise ValueError(
            f"none of the class-words {list(class_words)!r} are in the embedding table"
        )
    mean = table.lookup(present).mean(axis=0)
    cid = class_id if class_id is not None else "+".join(present)
    return ClassRep(class_id=cid, vector=unit_normalize(mean, f"class {cid!r} mean"))


def document_representation(
    doc: Document,
    table: EmbeddingTable,
    class_reps: Sequence[ClassRep],
    tau: float = 0.2,
) -> DocRep:
    """Class-attentive document vector.

    Each in-vocabulary token is weighted by softmax(best cosine against any
    class representation / tau); the weighted mean of token vectors is
    unit-normalized. A document with no in-vocabulary tokens is an error.
    """
    if not class_reps:
        raise ValueError("no class representations given")
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    toks = [t for t in doc.tokens if t in table]
    if not toks:
        raise ValueError(
            f"document {doc.id!r} has no tokens covered by the embedding table"
        )
    x = table.lookup(toks)
    x_unit = x / np.linalg.norm(x, axis=1, keepdims=True)
    reps = np.stack([cr.vector for cr in class_reps], axis=0)
    best = (x_unit @ reps.T).max(axis=1)
    # Stable softmax over token positions.
    z = best / tau
    z -= z.max()
    w = np.exp(z)
    w /= w.sum()
    vec = w @ x
    return DocRep(doc_id=doc.id, vector=unit_normalize(vec, f"document {doc.id!r} rep"))


def _read_word(fh: IO[bytes], path: Path) -> str:
    chunks = bytearray()
    while True:
        b = fh.read(1)
        if not b:
            raise ValueError(f"{path}: truncated file while reading a word")
        if b == b" ":
            break
        chunks += b
    try:
        return chunks.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path}: invalid UTF-8 in word record: {exc}") from None


def load_embedding_table(path: str | Path) -> EmbeddingTable:
    """Read a binary embedding table file.

    Layout: a header line ``WOTEMB1 <dim> <vocab_size>\\n`` followed by one
    record per word: the UTF-8 word bytes (no whitespace), a single space,
    then ``dim`` little-endian float32 values. Vectors round-trip bit-exactly.
    """
    path = Path(path)
    with path.open("rb") as fh:
        header = fh.readline().decode("utf-8", errors="replace").split()
        if len(header) != 3 or header[0] != TABLE_MAGIC:
            raise ValueError(
                f"{path}: not an embedding table file (bad header {header!r})"
            )
        try:
            dim, vocab_size = int(header[1]), int(header[2])
        except ValueError:
            raise ValueError(f"{path}: non-integer dim/vocab in header {header!r}") from None
        if dim < 1 or vocab_size < 1:
            raise ValueError(f"{path}: dim and vocab_size must be positive")
        vectors: dict[str, np.ndarray] = {}
        for _ in range(vocab_size):
            word = _read_word(fh, path)
            buf = fh.read(4 * dim)
            if len(buf) != 4 * dim:
                raise ValueError(f"{path}: truncated vector for word {word!r}")
            if word in vectors:
                raise ValueError(f"{path}: duplicate word record {word!r}")
            vectors[word] = np.frombuffer(buf, dtype="<f4").copy()
        trailing = fh.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after {vocab_size} records")
    return EmbeddingTable(vectors, source="imported")


def write_embedding_table(table_or_vectors, path: str | Path) -> None:
    """Write vectors in the binary table format read by `load_embedding_table`.

    Values are stored as little-endian float32.
    """
    if isinstance(table_or_vectors, EmbeddingTable):
        items = [(w, table_or_vectors[w]) for w in table_or_vectors.words]
    else:
        items = sorted(table_or_vectors.items())
    if not items:
        raise ValueError("refusing to write an empty embedding table")
    dim = len(np.asarray(items[0][1]))
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"{TABLE_MAGIC} {dim} {len(items)}\n".encode("utf-8"))
        for word, vec in items:
            if any(ch.isspace() for ch in word):
                raise ValueError(f"word {word!r} contains whitespace; not writable")
            arr = np.asarray(vec, dtype="<f4")
            if arr.shape != (dim,):
                raise ValueError(f"vector for {word!r} has shape {arr.shape}, expected ({dim},)")
            fh.write(word.encode("utf-8") + b" ")
            fh.write(arr.tobytes())
