"""Deterministic result files and the run manifest that hashes them."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, NamedTuple

from . import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def write_payload(path: str | Path, data: Any) -> Path:
    """Write JSON with sorted keys so equal inputs give byte-identical files."""
    path = Path(path)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def hash_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class RunManifest(NamedTuple):
    """Command, parameters and seeds of a run, plus sha256 of each artifact it wrote."""

    command: str
    parameters: dict[str, Any]
    seeds: dict[str, int]
    artifacts: dict[str, str]
    version: str = __version__

    @classmethod
    def build(
        cls,
        command: str,
        parameters: dict[str, Any],
        seeds: dict[str, int],
        paths: list[Path],
    ) -> "RunManifest":
        return cls(command, parameters, seeds, {p.name: hash_file(p) for p in paths})

    def to_dict(self) -> dict[str, Any]:
        return self._asdict()

    def write(self, out_dir: str | Path) -> Path:
        path = write_payload(Path(out_dir) / MANIFEST_NAME, self.to_dict())
        logger.info("wrote %s with %d artifact hashes", path, len(self.artifacts))
        return path

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        return cls(**data)
