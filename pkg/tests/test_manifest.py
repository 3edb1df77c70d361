"""Tests for result files and run manifests."""

import hashlib

from slicedmk import __version__
from slicedmk.manifest import MANIFEST_NAME, RunManifest, hash_file, write_payload


def test_payload_is_canonical(tmp_path):
    a = write_payload(tmp_path / "a.json", {"b": 1, "a": [1.5, "inf"]})
    b = write_payload(tmp_path / "b.json", {"a": [1.5, "inf"], "b": 1})
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().endswith("\n")


def test_hash_file(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"sliced" * 50_000)
    assert hash_file(path) == hashlib.sha256(b"sliced" * 50_000).hexdigest()


def test_manifest_round_trip(tmp_path):
    payload = write_payload(tmp_path / "distance.json", {"aggregate": 0.5})
    manifest = RunManifest.build("distance", {"p": 2.0}, {"seed": 42}, [payload])
    assert manifest.artifacts == {"distance.json": hash_file(payload)}
    assert manifest.version == __version__

    path = manifest.write(tmp_path)
    assert path.name == MANIFEST_NAME
    assert RunManifest.load(path) == manifest
