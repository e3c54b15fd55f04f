"""Binary model files.

Layout (all integers little-endian, floats IEEE-754 binary64):

* magic ``HVTM``, format version u16, mode byte (0 classify / 1 forecast)
* master seed u64, blend weight f64, normalization lo/hi f64
* quantizer: m0 f64, m1 f64, bucket count u32, bucket vectors (each u32
  dimension + packed payload)
* gram basis: n u32, gram vectors
* machine: clause count u32, threshold u32, specificity f64, literal budget
  u32, class count u32, feature count u32, states-per-side u16; state bytes
  clause-major; weights i32 class-major
* forecast models append the memory: entry count u64, then per entry the raw
  key payload (no length prefix), bucket u32, value f64

The bundling tie-break vector is not stored: it is re-derived from the master
seed on load.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .data import DataError, MinMaxTransform
from .encoding import GramBasis, IntervalEmbedding
from .hv import Hypervector, random_hv
from .memory import AssociativeMemory
from .pipeline import HvtmModel
from .rng import TAG_TIE_BREAK, spawn
from .tm import CoalescedTM, TMConfig

__all__ = ["save_model", "load_model", "MAGIC", "FORMAT_VERSION"]

MAGIC = b"HVTM"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<4sHBQddd")  # magic, version, mode, seed, lam, lo, hi
_EMB = struct.Struct("<ddI")
_BASIS = struct.Struct("<I")
_TM = struct.Struct("<IIdIIIH")
_MEM = struct.Struct("<Q")
_ENTRY_TAIL = struct.Struct("<Id")

_MODES = {"classify": 0, "forecast": 1}
_MODES_BACK = {v: k for k, v in _MODES.items()}


def save_model(model: HvtmModel, path: str | Path) -> None:
    """Write ``model`` to ``path`` in the format above."""
    parts: list[bytes] = [
        _HEAD.pack(
            MAGIC,
            FORMAT_VERSION,
            _MODES[model.mode],
            model.master_seed,
            model.lam,
            model.norm.lo,
            model.norm.hi,
        )
    ]
    emb = model.emb
    parts.append(_EMB.pack(emb.m0, emb.m1, emb.q))
    for v in emb.buckets:
        parts.append(v.to_bytes())
    parts.append(_BASIS.pack(model.basis.n))
    for v in model.basis.grams:
        parts.append(v.to_bytes())
    cfg = model.tm.config
    parts.append(
        _TM.pack(
            cfg.n_clauses,
            cfg.threshold,
            cfg.specificity,
            cfg.max_literals,
            cfg.n_classes,
            cfg.n_features,
            cfg.n_states,
        )
    )
    parts.append(model.tm.stored_states().tobytes())
    parts.append(model.tm.weights.astype("<i4").tobytes())
    if model.mode == "forecast":
        mem = model.mem
        parts.append(_MEM.pack(len(mem)))
        for key, bucket, value in mem.entries():
            parts.append(key.bits.tobytes())
            parts.append(_ENTRY_TAIL.pack(bucket, value))
    Path(path).write_bytes(b"".join(parts))


def load_model(path: str | Path) -> HvtmModel:
    """Read a model file; inverse of :func:`save_model`.

    Raises:
        DataError: On a missing file, bad magic, unsupported version, or a
            truncated/corrupt body.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model file not found: {path}")
    data = path.read_bytes()
    try:
        return _parse(data)
    except (struct.error, ValueError, IndexError) as e:
        raise DataError(f"corrupt model file {path}: {e}") from e


def _parse(data: bytes) -> HvtmModel:
    off = 0
    magic, version, mode_b, seed, lam, lo, hi = _HEAD.unpack_from(data, off)
    off += _HEAD.size
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    if mode_b not in _MODES_BACK:
        raise ValueError(f"unknown mode byte {mode_b}")
    mode = _MODES_BACK[mode_b]

    m0, m1, q = _EMB.unpack_from(data, off)
    off += _EMB.size
    buckets = []
    for _ in range(q):
        v, off = Hypervector.from_bytes(data, off)
        buckets.append(v)
    emb = IntervalEmbedding(m0, m1, q, tuple(buckets))

    (n,) = _BASIS.unpack_from(data, off)
    off += _BASIS.size
    grams = []
    for _ in range(n):
        v, off = Hypervector.from_bytes(data, off)
        grams.append(v)
    basis = GramBasis(n, tuple(grams))

    n_clauses, threshold, spec, max_lit, n_classes, n_features, n_states = _TM.unpack_from(
        data, off
    )
    off += _TM.size
    cfg = TMConfig(
        n_clauses=n_clauses,
        threshold=threshold,
        specificity=spec,
        max_literals=max_lit,
        n_classes=n_classes,
        n_features=n_features,
        n_states=n_states,
    )
    tm = CoalescedTM(cfg, seed)
    n_state_bytes = n_clauses * 2 * n_features
    if len(data) - off < n_state_bytes:
        raise ValueError("truncated machine states")
    stored = np.frombuffer(data, dtype=np.uint8, count=n_state_bytes, offset=off).reshape(
        n_clauses, 2 * n_features
    )
    off += n_state_bytes
    tm.set_stored_states(stored)
    n_w = n_classes * n_clauses
    if len(data) - off < 4 * n_w:
        raise ValueError("truncated weights")
    tm.weights[...] = (
        np.frombuffer(data, dtype="<i4", count=n_w, offset=off)
        .reshape(n_classes, n_clauses)
        .astype(np.int64)
    )
    off += 4 * n_w

    mem = None
    if mode == "forecast":
        (count,) = _MEM.unpack_from(data, off)
        off += _MEM.size
        mem = AssociativeMemory(n_features)
        nb = (n_features + 7) // 8
        for _ in range(count):
            if len(data) - off < nb + _ENTRY_TAIL.size:
                raise ValueError("truncated memory entry")
            key = np.frombuffer(data, dtype=np.uint8, count=nb, offset=off)
            off += nb
            bucket, value = _ENTRY_TAIL.unpack_from(data, off)
            off += _ENTRY_TAIL.size
            mem.add(Hypervector(n_features, key), bucket, value)
    if off != len(data):
        raise ValueError(f"{len(data) - off} trailing bytes")

    tie = random_hv(spawn(seed, TAG_TIE_BREAK), emb.dim)
    return HvtmModel(
        mode, seed, emb, basis, tie, MinMaxTransform(lo, hi), tm, mem=mem, lam=lam
    )
