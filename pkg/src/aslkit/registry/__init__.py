from .core import Registry, RegistryError
from .store import CorruptStoreError, DocumentStore

__all__ = ["Registry", "RegistryError", "DocumentStore", "CorruptStoreError"]
