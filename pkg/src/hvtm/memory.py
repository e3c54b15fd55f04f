"""Hamming-distance associative memory over window keys.

Entries are ordered ``(key vector, bucket id, scalar value)`` triples; lookup
is an exhaustive nearest-neighbour scan in Hamming space.  The scalar stored
with each window is the value that *followed* it, so a retrieval directly
proposes the next observation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .encoding import GramBasis, IntervalEmbedding, SeriesEncoder
from .hv import Hypervector

__all__ = ["AssociativeMemory", "Retrieval"]


@dataclass(frozen=True)
class Retrieval:
    """Nearest stored entry: its bucket, its successor value, and the distance."""

    bucket: int
    value: float
    distance: int


class AssociativeMemory:
    """Ordered store of (key, bucket, value) triples with arg-min retrieval."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"invalid dimension {dim}")
        self.dim = dim
        self._n_bytes = (dim + 7) // 8
        self._keys: list[NDArray[np.uint8]] = []
        self._buckets: list[int] = []
        self._values: list[float] = []
        self._matrix: NDArray[np.uint8] | None = None

    @classmethod
    def build(
        cls,
        emb: IntervalEmbedding,
        basis: GramBasis,
        sequences: Sequence[Sequence[float]],
    ) -> "AssociativeMemory":
        """Fill a memory from whole series.

        Every window with a next value contributes one entry, keyed by the
        window's n-gram vector and valued by the bucket and raw value of its
        successor.  ``M`` series of length ``L`` give ``M * (L - n)`` entries,
        in series order then window order.
        """
        if len(sequences) == 0:
            raise ValueError("need at least one sequence")
        enc = SeriesEncoder(emb, basis)
        mem = cls(emb.dim)
        for i, seq in enumerate(sequences):
            try:
                keys, succ_b, succ_v = enc.windows_with_successors(seq)
            except ValueError as e:
                raise ValueError(f"sequence {i}: {e}") from e
            for w in range(keys.shape[0]):
                mem._append(keys[w], int(succ_b[w]), float(succ_v[w]))
        return mem

    def _append(self, key_bits: NDArray[np.uint8], bucket: int, value: float) -> None:
        self._keys.append(np.array(key_bits, dtype=np.uint8))
        self._buckets.append(bucket)
        self._values.append(value)
        self._matrix = None

    def add(self, key: Hypervector, bucket: int, value: float) -> None:
        """Append one entry; later entries never shadow earlier equal keys."""
        if key.dim != self.dim:
            raise ValueError(f"key dimension {key.dim} != {self.dim}")
        self._append(key.bits, int(bucket), float(value))

    def __len__(self) -> int:
        return len(self._keys)

    def _key_matrix(self) -> NDArray[np.uint8]:
        if self._matrix is None:
            self._matrix = np.vstack(self._keys) if self._keys else np.empty((0, self._n_bytes), np.uint8)
        return self._matrix

    def retrieve(self, query: Hypervector) -> Retrieval:
        """Return the entry whose key is Hamming-closest to ``query``.

        Ties go to the earliest inserted entry.  Empty memory is an error.
        """
        if len(self) == 0:
            raise ValueError("retrieve from empty memory")
        if query.dim != self.dim:
            raise ValueError(f"query dimension {query.dim} != {self.dim}")
        return self.retrieve_packed(query.bits)

    def retrieve_packed(self, key_bits: NDArray[np.uint8]) -> Retrieval:
        """Same as :meth:`retrieve` for an already-packed key payload."""
        mat = self._key_matrix()
        dists = np.bitwise_count(mat ^ key_bits[np.newaxis, :]).sum(axis=1)
        idx = int(np.argmin(dists))  # argmin takes the first minimum: insertion order
        return Retrieval(self._buckets[idx], self._values[idx], int(dists[idx]))

    def entries(self) -> list[tuple[Hypervector, int, float]]:
        """All entries in insertion order (keys re-wrapped as vectors)."""
        return [
            (Hypervector(self.dim, k), b, v)
            for k, b, v in zip(self._keys, self._buckets, self._values)
        ]
