"""One-entity-one-file JSON persistence with atomic writes."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from ..serialize import canonical_json

KINDS = ("services", "sessions", "slas")


class CorruptStoreError(RuntimeError):
    """A stored document could not be decoded; names the offending file."""

    def __init__(self, path: Path, cause: Exception):
        super().__init__(f"corrupt store document {path}: {cause}")
        self.path = path


class DocumentStore:
    """A directory of canonical-JSON documents, one file per entity.

    Writes go through a temp file in the same directory followed by an atomic
    rename, so readers never observe partial documents.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for kind in KINDS:
            (self.root / kind).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, name: str) -> Path:
        return self.root / kind / f"{name}.json"

    def write(self, kind: str, name: str, doc: dict) -> None:
        target = self._path(kind, name)
        data = canonical_json(doc).encode("utf-8")
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, target)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def load_all(self, kind: str) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for path in sorted((self.root / kind).glob("*.json")):
            try:
                out[path.stem] = json.loads(path.read_text(encoding="utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise CorruptStoreError(path, exc) from exc
        return out
