"""Export manifest: provenance and integrity data for one table file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .table import MAGIC, file_sha256

__all__ = ["ExportManifest", "load_manifest", "verify_table"]


@dataclass(frozen=True)
class ExportManifest:
    model: str
    corpus: str
    case: str
    layer: str
    max_length: int
    dim: int
    vocab_size: int
    omitted_words: list[str]
    sha256: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> ExportManifest:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return ExportManifest(**raw)
    except TypeError as exc:
        raise ValueError(f"{path}: not a valid export manifest: {exc}") from None


def verify_table(manifest: ExportManifest, table_path: str | Path) -> None:
    """Check the table file against the manifest's checksum and header.

    Raises ValueError on any mismatch.
    """
    table_path = Path(table_path)
    digest = file_sha256(table_path)
    if digest != manifest.sha256:
        raise ValueError(
            f"{table_path}: checksum mismatch (file {digest[:12]}..., "
            f"manifest {manifest.sha256[:12]}...)"
        )
    with table_path.open("rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").split()
    if len(header) != 3 or header[0] != MAGIC:
        raise ValueError(f"{table_path}: malformed table header")
    dim, vocab_size = int(header[1]), int(header[2])
    if dim != manifest.dim or vocab_size != manifest.vocab_size:
        raise ValueError(
            f"{table_path}: header says dim={dim} vocab={vocab_size}, manifest "
            f"says dim={manifest.dim} vocab={manifest.vocab_size}"
        )
