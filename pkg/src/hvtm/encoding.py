"""Scalar quantization and n-gram sequence encoding.

A real interval ``[m0, m1]`` is cut into ``q`` equal buckets, each assigned a
random hypervector (the item memory).  A sliding window of ``n`` consecutive
bucket vectors becomes one key vector: each element is rotated by its age
(newest element rotation 0), bound (XOR) with a per-position gram vector, and
the ``n`` results are XORed together.  A whole series is the majority bundle
of all its window keys.

:class:`SeriesEncoder` is the production path: it pre-binds every
(rotation, gram, bucket) combination into a lookup table so a window key
costs ``n`` XORs of packed bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .hv import Hypervector, bind, bundle, hamming, permute, random_hv
from .rng import TAG_GRAM_BASIS, TAG_ITEM_MEMORY, spawn

__all__ = [
    "IntervalEmbedding",
    "GramBasis",
    "EncodedSequence",
    "SeriesEncoder",
    "embed_scalar",
    "decode_bucket",
    "encode_sequence",
    "ngram_hv",
    "encode_series",
]


@dataclass(frozen=True)
class IntervalEmbedding:
    """Quantizer: ``q`` equal buckets over ``[m0, m1]`` with one hypervector each."""

    m0: float
    m1: float
    q: int
    buckets: tuple[Hypervector, ...]

    def __post_init__(self):
        if not self.m1 > self.m0:
            raise ValueError(f"invalid interval [{self.m0}, {self.m1}]: need m1 > m0")
        if self.q < 1:
            raise ValueError(f"invalid bucket count {self.q}")
        if len(self.buckets) != self.q:
            raise ValueError(f"expected {self.q} bucket vectors, got {len(self.buckets)}")
        dims = {v.dim for v in self.buckets}
        if len(dims) != 1:
            raise ValueError(f"bucket vectors disagree on dimension: {sorted(dims)}")

    @classmethod
    def build(cls, m0: float, m1: float, q: int, dim: int, seed: int) -> "IntervalEmbedding":
        """Draw the item memory from the master seed's item-memory stream.

        Bucket vectors are drawn sequentially (bucket 0 first), so the same
        ``(seed, dim)`` always yields the same memory regardless of ``q``
        prefix length.
        """
        rng = spawn(seed, TAG_ITEM_MEMORY)
        vecs = tuple(random_hv(rng, dim) for _ in range(q))
        return cls(float(m0), float(m1), int(q), vecs)

    @property
    def dim(self) -> int:
        return self.buckets[0].dim

    @property
    def step(self) -> float:
        return (self.m1 - self.m0) / self.q

    def bucket_of(self, x: float) -> int:
        """Quantize ``x``: floor((x - m0)/step), clamped into [0, q-1]."""
        if np.isnan(x):
            raise ValueError("cannot quantize NaN")
        idx = int(np.floor((float(x) - self.m0) / self.step))
        return min(max(idx, 0), self.q - 1)


@dataclass(frozen=True)
class GramBasis:
    """Per-position gram vectors ``G_0 .. G_{n-1}`` for n-gram binding."""

    n: int
    grams: tuple[Hypervector, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"invalid n-gram size {self.n}")
        if len(self.grams) != self.n:
            raise ValueError(f"expected {self.n} gram vectors, got {len(self.grams)}")
        dims = {v.dim for v in self.grams}
        if len(dims) != 1:
            raise ValueError(f"gram vectors disagree on dimension: {sorted(dims)}")

    @classmethod
    def build(cls, n: int, dim: int, seed: int) -> "GramBasis":
        """Draw ``G_0 .. G_{n-1}`` sequentially from the gram-basis stream."""
        rng = spawn(seed, TAG_GRAM_BASIS)
        return cls(int(n), tuple(random_hv(rng, dim) for _ in range(n)))

    @property
    def dim(self) -> int:
        return self.grams[0].dim


@dataclass(frozen=True)
class EncodedSequence:
    """A series element-wise embedded: one hypervector and bucket id per value."""

    hvs: tuple[Hypervector, ...]
    buckets: NDArray[np.int64]


def embed_scalar(emb: IntervalEmbedding, x: float) -> tuple[Hypervector, int]:
    """Map a scalar to its bucket hypervector and bucket index."""
    b = emb.bucket_of(x)
    return emb.buckets[b], b


def decode_bucket(emb: IntervalEmbedding, bucket: int) -> float:
    """Return the midpoint of ``bucket``: ``m0 + (bucket + 0.5) * step``."""
    if not 0 <= bucket < emb.q:
        raise ValueError(f"bucket {bucket} outside [0, {emb.q - 1}]")
    return emb.m0 + (bucket + 0.5) * emb.step


def encode_sequence(emb: IntervalEmbedding, values: Sequence[float]) -> EncodedSequence:
    """Embed every element of ``values``; empty input is an error."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a non-empty 1-d series")
    ids = np.array([emb.bucket_of(x) for x in arr], dtype=np.int64)
    return EncodedSequence(tuple(emb.buckets[b] for b in ids), ids)


def ngram_hv(basis: GramBasis, window: Sequence[Hypervector]) -> Hypervector:
    """Key vector of one window of ``basis.n`` element hypervectors.

    The last (newest) element is rotated by 0 and bound with ``G_0``, the one
    before by 1 with ``G_1``, and so on; the bound terms are XORed together::

        key = XOR_{j=0..n-1}  permute(window[n-1-j], j) ^ G_j
    """
    n = basis.n
    if len(window) != n:
        raise ValueError(f"window has {len(window)} elements, basis needs {n}")
    out = bind(permute(window[n - 1], 0), basis.grams[0])
    for j in range(1, n):
        out = bind(out, bind(permute(window[n - 1 - j], j), basis.grams[j]))
    return out


class SeriesEncoder:
    """Caches rotated+bound bucket vectors for fast window encoding.

    The table entry ``(j, b)`` holds ``permute(bucket_b, j) ^ G_j`` packed,
    so a window key is ``n`` XORs over byte arrays and a full series is a
    vectorized sweep.
    """

    def __init__(self, emb: IntervalEmbedding, basis: GramBasis, tie: Hypervector | None = None):
        if emb.dim != basis.dim:
            raise ValueError(f"dimension mismatch: buckets {emb.dim}, grams {basis.dim}")
        if tie is not None and tie.dim != emb.dim:
            raise ValueError(f"tie-break vector dimension {tie.dim} != {emb.dim}")
        self.emb = emb
        self.basis = basis
        self.tie = tie
        self.dim = emb.dim
        self.n_bytes = (self.dim + 7) // 8
        n, q = basis.n, emb.q
        table = np.empty((n, q, self.n_bytes), dtype=np.uint8)
        for j in range(n):
            for b in range(q):
                table[j, b] = bind(permute(emb.buckets[b], j), basis.grams[j]).bits
        table.setflags(write=False)
        self._table = table

    def bucket_ids(self, values: Sequence[float]) -> NDArray[np.int64]:
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("need a 1-d series")
        if np.isnan(arr).any():
            raise ValueError("cannot quantize NaN")
        idx = np.floor((arr - self.emb.m0) / self.emb.step).astype(np.int64)
        return np.clip(idx, 0, self.emb.q - 1)

    def window_keys(self, values: Sequence[float]) -> NDArray[np.uint8]:
        """Packed key vectors of all ``len(values) - n + 1`` sliding windows."""
        n = self.basis.n
        ids = self.bucket_ids(values)
        if ids.size < n:
            raise ValueError(f"series of length {ids.size} shorter than window {n}")
        nwin = ids.size - n + 1
        keys = self._table[0][ids[n - 1 : n - 1 + nwin]].copy()
        for j in range(1, n):
            np.bitwise_xor(keys, self._table[j][ids[n - 1 - j : n - 1 - j + nwin]], out=keys)
        return keys

    def key_of_window(self, window: Sequence[float]) -> Hypervector:
        """Key vector of exactly one window of ``n`` raw values."""
        keys = self.window_keys(window)
        if keys.shape[0] != 1:
            raise ValueError(f"expected exactly {self.basis.n} values, got {len(window)}")
        return Hypervector(self.dim, keys[0])

    def encode(self, values: Sequence[float]) -> Hypervector:
        """Majority-bundle all window keys into one series vector."""
        keys = self.window_keys(values)
        nwin = keys.shape[0]
        if nwin == 1:
            return Hypervector(self.dim, keys[0])
        counts = np.unpackbits(keys, axis=1, count=self.dim, bitorder="little").sum(
            axis=0, dtype=np.int64
        )
        voters = nwin
        if nwin % 2 == 0:
            if self.tie is None:
                raise ValueError(
                    f"even window count {nwin} needs a tie-break vector"
                )
            counts = counts + self.tie.to_bools()
            voters += 1
        majority = (counts * 2 > voters).astype(np.uint8)
        return Hypervector(self.dim, np.packbits(majority, bitorder="little"))

    def windows_with_successors(
        self, values: Sequence[float]
    ) -> tuple[NDArray[np.uint8], NDArray[np.int64], NDArray[np.float64]]:
        """Training view of a series: every window that has a next value.

        Returns ``(keys, succ_buckets, succ_values)`` where row ``w`` is the
        packed key of the window covering ``values[w .. w+n-1]``, and the
        successor entries describe ``values[w+n]``.  A series of length ``L``
        yields ``L - n`` rows.
        """
        arr = np.asarray(values, dtype=np.float64)
        n = self.basis.n
        if arr.size < n + 1:
            raise ValueError(
                f"series of length {arr.size} too short: need at least {n + 1} values"
            )
        keys = self.window_keys(arr)[:-1]
        ids = self.bucket_ids(arr)
        return keys, ids[n:], arr[n:]


def encode_series(
    emb: IntervalEmbedding,
    basis: GramBasis,
    values: Sequence[float],
    tie: Hypervector | None = None,
) -> Hypervector:
    """Encode a whole series: bundle the keys of all sliding windows.

    Args:
        emb: Scalar quantizer.
        basis: Gram vectors; ``len(values)`` must be at least ``basis.n``.
        values: Raw series.
        tie: Tie-break vector, needed iff the window count is even.
    """
    return SeriesEncoder(emb, basis, tie).encode(values)
