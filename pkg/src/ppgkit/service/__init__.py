"""HTTP editing service: a versioned document store over the library."""

from .app import create_app
from .store import DocumentStore, VersionConflictError

__all__ = ["create_app", "DocumentStore", "VersionConflictError"]
