"""Versioned in-memory document store with optional directory write-through.

Reads take an atomic (version, ppg) snapshot; mutations are serialized per
document behind a lock and bump the version by exactly one. The store is an
editor backend, not a database: persistence is a plain directory of .ppg
files plus one JSON sidecar per document carrying version and label.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..core import Ppg, validate
from ..errors import PpgError, ValidationError
from ..formats import load_ppg, save_ppg


class VersionConflictError(PpgError):
    """An edit was based on a stale version; carries the current one."""

    def __init__(self, expected: int, current: int):
        super().__init__(
            f"edit based on version {expected} but the document is at {current}"
        )
        self.current = current


@dataclass
class Document:
    id: str
    label: str
    state: tuple[int, Ppg]  # (version, ppg), swapped atomically
    lock: threading.Lock = field(default_factory=threading.Lock)


class DocumentStore:
    def __init__(self, data_dir: Optional[Path] = None):
        self._documents: dict[str, Document] = {}
        self._registry_lock = threading.Lock()
        self._data_dir = Path(data_dir) if data_dir is not None else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._load_existing()

    def create(self, ppg: Ppg, label: Optional[str] = None) -> Document:
        doc_id = uuid.uuid4().hex[:12]
        document = Document(doc_id, label or doc_id, (1, ppg))
        with self._registry_lock:
            self._documents[doc_id] = document
        self._persist(document)
        return document

    def snapshot(self, doc_id: str) -> tuple[int, Ppg, str]:
        """Consistent (version, ppg, label) view; raises KeyError if unknown."""
        document = self._documents[doc_id]
        version, ppg = document.state
        return version, ppg, document.label

    def list(self) -> list[tuple[str, int, Ppg, str]]:
        with self._registry_lock:
            documents = list(self._documents.values())
        out = []
        for document in documents:
            version, ppg = document.state
            out.append((document.id, version, ppg, document.label))
        return out

    def mutate(
        self, doc_id: str, base_version: int, operation: Callable[[Ppg], Ppg]
    ) -> tuple[int, Ppg, Ppg]:
        """Apply ``operation`` if ``base_version`` is current.

        Returns (new_version, previous_ppg, new_ppg). Exactly one of two
        racing mutations from the same base version can succeed; the loser
        gets a VersionConflictError and the document is unchanged.
        """
        document = self._documents[doc_id]
        with document.lock:
            version, previous = document.state
            if base_version != version:
                raise VersionConflictError(base_version, version)
            updated = operation(previous)
            violations = validate(updated)
            if violations:
                raise ValidationError(
                    "edit produced an invalid posteriorgram: "
                    + "; ".join(v.message for v in violations[:3])
                )
            document.state = (version + 1, updated)
            self._persist(document)
            return version + 1, previous, updated

    def _persist(self, document: Document) -> None:
        if self._data_dir is None:
            return
        version, ppg = document.state
        save_ppg(ppg, self._data_dir / f"{document.id}.ppg")
        meta = {"version": version, "label": document.label}
        (self._data_dir / f"{document.id}.meta.json").write_text(json.dumps(meta))

    def _load_existing(self) -> None:
        for path in sorted(self._data_dir.glob("*.ppg")):
            doc_id = path.stem
            ppg = load_ppg(path)
            meta_path = self._data_dir / f"{doc_id}.meta.json"
            version, label = 1, doc_id
            if meta_path.exists():
                meta = json.loads(meta_path.read_text())
                version = int(meta.get("version", 1))
                label = str(meta.get("label", doc_id))
            self._documents[doc_id] = Document(doc_id, label, (version, ppg))
