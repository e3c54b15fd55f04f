"""Binary spatter-code hypervectors.

Vectors are dense binary strings of dimension ``dim``, stored bit-packed
(LSB-first within each byte) in a read-only ``uint8`` array.  The algebra is
the classic one: component-wise majority to superpose (bundle), XOR to
associate (bind, its own inverse), cyclic rotation to encode order (permute),
and Hamming distance as the similarity metric.
"""
from __future__ import annotations

import struct
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "Hypervector",
    "random_hv",
    "bind",
    "bundle",
    "permute",
    "hamming",
]

_HEADER = struct.Struct("<I")  # dim prefix of the wire format


def _n_bytes(dim: int) -> int:
    return (dim + 7) // 8


def _tail_mask(dim: int) -> int:
    """Bit mask selecting the valid bits of the final payload byte."""
    rem = dim % 8
    return 0xFF if rem == 0 else (1 << rem) - 1


class Hypervector:
    """An immutable binary vector of ``dim`` bits.

    Attributes:
        dim: Number of bits.
        bits: Packed payload, ``ceil(dim/8)`` bytes, LSB-first bit order,
            unused tail bits forced to zero.  Read-only.
    """

    __slots__ = ("dim", "bits")

    dim: int
    bits: NDArray[np.uint8]

    def __init__(self, dim: int, bits: NDArray[np.uint8]):
        if dim < 1:
            raise ValueError(f"invalid dimension {dim}: must be >= 1")
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.shape != (_n_bytes(dim),):
            raise ValueError(
                f"payload has {arr.shape} bytes, dimension {dim} needs ({_n_bytes(dim)},)"
            )
        arr = arr.copy()
        arr[-1] &= _tail_mask(dim)
        arr.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):  # pragma: no cover - safety net
        raise AttributeError("Hypervector is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_bools(cls, values: Iterable[int]) -> "Hypervector":
        """Build from an explicit 0/1 sequence (index 0 first)."""
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("need a non-empty 1-d bit sequence")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("bit values must be 0 or 1")
        packed = np.packbits(arr.astype(np.uint8), bitorder="little")
        return cls(int(arr.size), packed)

    @classmethod
    def zeros(cls, dim: int) -> "Hypervector":
        return cls(dim, np.zeros(_n_bytes(dim), dtype=np.uint8))

    # -- views --------------------------------------------------------------

    def to_bools(self) -> NDArray[np.uint8]:
        """Unpack to a 0/1 array of length ``dim``."""
        return np.unpackbits(self.bits, count=self.dim, bitorder="little")

    @property
    def popcount(self) -> int:
        """Number of set bits."""
        return int(np.bitwise_count(self.bits).sum())

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.dim:
            raise IndexError(i)
        return (self.bits[i >> 3] >> (i & 7)) & 1

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypervector)
            and self.dim == other.dim
            and bool(np.array_equal(self.bits, other.bits))
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.bits.tobytes()))

    def __repr__(self) -> str:
        if self.dim <= 32:
            s = "".join(str(b) for b in self.to_bools())
            return f"Hypervector({self.dim}, [{s}])"
        return f"Hypervector(dim={self.dim}, popcount={self.popcount})"

    # -- wire format --------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Serialize: uint32-LE dimension, then the packed payload."""
        return _HEADER.pack(self.dim) + self.bits.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["Hypervector", int]:
        """Parse one serialized vector; returns (vector, next offset)."""
        if len(data) - offset < _HEADER.size:
            raise ValueError("truncated hypervector header")
        (dim,) = _HEADER.unpack_from(data, offset)
        offset += _HEADER.size
        nb = _n_bytes(dim) if dim >= 1 else 0
        if dim < 1 or len(data) - offset < nb:
            raise ValueError("truncated or corrupt hypervector payload")
        payload = np.frombuffer(data, dtype=np.uint8, count=nb, offset=offset)
        return cls(dim, payload), offset + nb


def random_hv(rng: np.random.Generator, dim: int) -> Hypervector:
    """Draw a vector of iid fair bits from ``rng``.

    Args:
        rng: Source generator (see :mod:`hvtm.rng`).
        dim: Dimension; must be at least 8.
    """
    if dim < 8:
        raise ValueError(f"invalid dimension {dim}: random vectors need dim >= 8")
    raw = rng.integers(0, 256, size=_n_bytes(dim), dtype=np.uint8)
    return Hypervector(dim, raw)


def _check_same_dim(a: Hypervector, b: Hypervector, op: str) -> None:
    if a.dim != b.dim:
        raise ValueError(f"{op}: dimension mismatch {a.dim} != {b.dim}")


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    """Associate two vectors by XOR.  Self-inverse and distance-preserving."""
    _check_same_dim(a, b, "bind")
    return Hypervector(a.dim, np.bitwise_xor(a.bits, b.bits))


def bundle(vectors: Sequence[Hypervector], tie: Hypervector | None = None) -> Hypervector:
    """Superpose vectors by component-wise majority vote.

    With an odd number of inputs the vote is decisive.  With an even number a
    ``tie`` vector of the same dimension must be supplied; it is added to the
    vote so every component count is odd.

    Args:
        vectors: Non-empty list of equal-dimension vectors.
        tie: Tie-break vector, required iff ``len(vectors)`` is even.

    Returns:
        The majority vector.
    """
    if len(vectors) == 0:
        raise ValueError("bundle: empty input")
    dim = vectors[0].dim
    for v in vectors[1:]:
        _check_same_dim(vectors[0], v, "bundle")
    voters = list(vectors)
    if len(voters) % 2 == 0:
        if tie is None:
            raise ValueError(
                f"bundle: even count {len(voters)} needs a tie-break vector"
            )
        _check_same_dim(vectors[0], tie, "bundle")
        voters.append(tie)
    if len(voters) == 1:
        return voters[0]
    counts = np.zeros(dim, dtype=np.int64)
    for v in voters:
        counts += v.to_bools()
    majority = (counts * 2 > len(voters)).astype(np.uint8)
    return Hypervector(dim, np.packbits(majority, bitorder="little"))


def permute(v: Hypervector, j: int) -> Hypervector:
    """Rotate cyclically by ``j`` positions: bit ``i`` moves to ``(i+j) % dim``."""
    shift = j % v.dim
    if shift == 0:
        return v
    rolled = np.roll(v.to_bools(), shift)
    return Hypervector(v.dim, np.packbits(rolled, bitorder="little"))


def hamming(a: Hypervector, b: Hypervector) -> int:
    """Number of positions where ``a`` and ``b`` differ."""
    _check_same_dim(a, b, "hamming")
    return int(np.bitwise_count(np.bitwise_xor(a.bits, b.bits)).sum())
