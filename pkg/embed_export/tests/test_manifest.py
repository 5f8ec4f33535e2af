"""Manifest round-trip and table integrity verification."""

import json

import numpy as np
import pytest

from embed_export import (
    ExportManifest,
    file_sha256,
    load_manifest,
    verify_table,
    write_table,
)


def manifest_for(table_path, **overrides) -> ExportManifest:
    fields = {
        "model": "tiny",
        "corpus": "corpus.jsonl",
        "case": "lowercase",
        "layer": "final",
        "max_length": 512,
        "dim": 2,
        "vocab_size": 2,
        "omitted_words": [],
        "sha256": file_sha256(table_path),
    }
    fields.update(overrides)
    return ExportManifest(**fields)


@pytest.fixture()
def table_path(tmp_path):
    path = tmp_path / "t.wotemb"
    write_table({"ice": np.array([1.0, 2.0]), "snow": np.array([3.0, 4.0])}, path)
    return path


class TestManifestIO:
    def test_save_load_roundtrip(self, tmp_path, table_path):
        manifest = manifest_for(table_path, omitted_words=["zz"])
        target = tmp_path / "m.json"
        manifest.save(target)
        assert load_manifest(target) == manifest

    def test_json_is_plain_and_sorted(self, tmp_path, table_path):
        target = tmp_path / "m.json"
        manifest_for(table_path).save(target)
        raw = json.loads(target.read_text(encoding="utf-8"))
        assert list(raw) == sorted(raw)
        assert raw["dim"] == 2

    def test_load_rejects_wrong_schema(self, tmp_path):
        target = tmp_path / "m.json"
        target.write_text('{"model": "x"}', encoding="utf-8")
        with pytest.raises(ValueError, match="not a valid export manifest"):
            load_manifest(target)


class TestVerifyTable:
    def test_accepts_matching_file(self, table_path):
        verify_table(manifest_for(table_path), table_path)

    def test_rejects_checksum_mismatch(self, table_path):
        manifest = manifest_for(table_path, sha256="0" * 64)
        with pytest.raises(ValueError, match="checksum mismatch"):
            verify_table(manifest, table_path)

    def test_rejects_tampered_file(self, table_path):
        manifest = manifest_for(table_path)
        data = bytearray(table_path.read_bytes())
        data[-1] ^= 0xFF
        table_path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="checksum mismatch"):
            verify_table(manifest, table_path)

    def test_rejects_dim_vocab_mismatch(self, table_path):
        manifest = manifest_for(table_path, dim=3)
        with pytest.raises(ValueError, match="dim"):
            verify_table(manifest, table_path)

    def test_rejects_non_table_file(self, tmp_path):
        path = tmp_path / "not_a_table"
        path.write_bytes(b"hello world\n")
        manifest = manifest_for(path)
        with pytest.raises(ValueError, match="malformed table header"):
            verify_table(manifest, path)
