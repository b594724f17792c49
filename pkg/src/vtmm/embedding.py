"""Word and sentence vectors.

Word vectors are 300-wide and loaded from GloVe-style plain text (one token
per line followed by 300 floats). Sentence vectors are 768-wide and come
from a pluggable provider: either a precomputed text -> vector table
exported offline from a real encoder, or a deterministic stub that hashes
the text bytes. Out-of-vocabulary object labels are resolved by walking up
a child -> parent label hierarchy until a known token is found.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from .errors import EmptyText, MissingPrecomputedEntry, StorageError, UnresolvableLabel

logger = logging.getLogger("vtmm.embedding")

WORD_DIM = 300
SENTENCE_DIM = 768


class WordEmbeddingTable:
    """Immutable token -> 300-vector map; absence is a value, not an error."""

    dim = WORD_DIM

    def __init__(self, entries: dict[str, np.ndarray]):
        self._entries = {}
        for token, vec in entries.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (WORD_DIM,):
                raise ValueError(f"word vector for {token!r} has shape {arr.shape}, expected ({WORD_DIM},)")
            self._entries[token] = arr

    def lookup(self, token: str) -> np.ndarray | None:
        return self._entries.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def load(cls, path: str | Path) -> "WordEmbeddingTable":
        """Parse GloVe-style text: `token v1 ... v300` per line."""
        entries = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split(" ")
                if len(parts) != WORD_DIM + 1:
                    raise StorageError(
                        f"{path}:{lineno}: expected token + {WORD_DIM} floats, got {len(parts)} fields"
                    )
                entries[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        return cls(entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for token in sorted(self._entries):
                vals = " ".join(repr(float(v)) for v in self._entries[token])
                fh.write(f"{token} {vals}\n")


def lookup_word(table: WordEmbeddingTable, token: str) -> np.ndarray | None:
    """Stored vector if present, None otherwise."""
    return table.lookup(token)


class LabelHierarchy:
    """child -> parent label map; roots simply have no entry."""

    def __init__(self, parent: dict[str, str]):
        self._parent = dict(parent)

    def parent_of(self, label: str) -> str | None:
        return self._parent.get(label)

    def __len__(self) -> int:
        return len(self._parent)

    @classmethod
    def load(cls, path: str | Path) -> "LabelHierarchy":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in data.items()
        ):
            raise StorageError(f"{path}: hierarchy must be a JSON object of child -> parent strings")
        return cls(data)


def resolve_with_fallback(
    table: WordEmbeddingTable, hierarchy: LabelHierarchy, token: str
) -> tuple[str, np.ndarray]:
    """Walk the parent chain starting at `token` until a table hit.

    Returns the first resolvable ancestor (the token itself if in-vocab)
    with its vector. Raises UnresolvableLabel when the chain runs out, and
    also when a cycle is found in a user-supplied hierarchy: the visited
    set guarantees this terminates instead of hanging.
    """
    visited = set()
    current: str | None = token
    while current is not None:
        if current in visited:
            raise UnresolvableLabel(f"hierarchy cycle at {current!r} while resolving {token!r}")
        visited.add(current)
        vec = table.lookup(current)
        if vec is not None:
            return current, vec
        current = hierarchy.parent_of(current)
    raise UnresolvableLabel(f"no ancestor of {token!r} is present in the word-vector table")


class SentenceEmbedder:
    """768-wide sentence vectors, deterministic per text.

    provider="stub" seeds a PRNG from a stable 64-bit hash of the UTF-8
    bytes and draws a unit-norm vector; provider="precomputed" looks texts
    up in a table loaded from JSON ({"<exact text>": [768 floats]}).
    """

    dim = SENTENCE_DIM

    def __init__(self, provider: str = "stub", table: dict[str, np.ndarray] | None = None):
        if provider not in ("stub", "precomputed"):
            raise ValueError(f"unknown sentence-vector provider {provider!r}")
        if provider == "precomputed" and table is None:
            raise ValueError("precomputed provider needs a table")
        self.provider = provider
        self._table = None
        if table is not None:
            self._table = {}
            for text, vec in table.items():
                arr = np.asarray(vec, dtype=np.float64)
                if arr.shape != (SENTENCE_DIM,):
                    raise ValueError(
                        f"sentence vector for {text!r} has shape {arr.shape}, expected ({SENTENCE_DIM},)"
                    )
                self._table[text] = arr

    @classmethod
    def load_precomputed(cls, path: str | Path) -> "SentenceEmbedder":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise StorageError(f"{path}: sentence-vector file must be a JSON object")
        return cls(provider="precomputed", table=data)

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise EmptyText("cannot embed empty text")
        if self.provider == "precomputed":
            vec = self._table.get(text)
            if vec is None:
                raise MissingPrecomputedEntry(
                    f"no precomputed sentence vector for {text!r}; regenerate the embeddings file"
                )
            return vec
        return _stub_vector(text)


def _stub_vector(text: str) -> np.ndarray:
    # Stable across runs and platforms: blake2b of the UTF-8 bytes seeds the
    # generator, standard normal is symmetric, output normalized to unit L2.
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    seed = int.from_bytes(digest, "little")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(SENTENCE_DIM)
    return vec / np.linalg.norm(vec)


def save_sentence_vectors(table: dict[str, np.ndarray], path: str | Path) -> None:
    payload = {text: [float(v) for v in np.asarray(vec)] for text, vec in table.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
