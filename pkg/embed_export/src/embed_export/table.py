"""Writer for the engine's binary embedding-table format.

Layout: an ASCII header line `WOTEMB1 <dim> <vocab_size>\n`, then one record
per word: the word's UTF-8 bytes (no whitespace allowed), a single space, and
`dim` little-endian float32 values.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Mapping

import numpy as np

__all__ = ["MAGIC", "write_table", "file_sha256"]

MAGIC = "WOTEMB1"


def write_table(vectors: Mapping[str, np.ndarray], path: str | Path) -> None:
    """Write `vectors` (word -> 1-D array) in sorted word order.

    Validates every record before touching the file, so a failed call never
    leaves a partial table behind. The stored values are float32; vectors
    whose float32 form has (near-)zero norm are rejected because the engine
    refuses to load them.
    """
    if not vectors:
        raise ValueError("refusing to write an empty embedding table")
    words = sorted(vectors)
    dim = len(np.asarray(vectors[words[0]]).reshape(-1))
    records: list[bytes] = []
    for word in words:
        if not word or any(ch.isspace() for ch in word):
            raise ValueError(f"word {word!r} contains whitespace; cannot serialize")
        vec = np.asarray(vectors[word], dtype=np.float64).reshape(-1)
        if vec.shape[0] != dim:
            raise ValueError(f"word {word!r} has dim {vec.shape[0]}, expected {dim}")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"word {word!r} has a non-finite vector")
        stored = vec.astype("<f4")
        if float(np.linalg.norm(stored)) < 1e-12:
            raise ValueError(f"word {word!r} has a zero vector at float32 precision")
        records.append(word.encode("utf-8") + b" " + stored.tobytes())
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"{MAGIC} {dim} {len(words)}\n".encode("ascii"))
        fh.writelines(records)


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
