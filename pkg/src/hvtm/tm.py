"""Coalesced weighted Tsetlin machine.

One shared pool of conjunctive clauses is trained over the literals of a
binary input (each feature and its negation); a signed integer weight matrix
couples every clause to every class.  A class score is the weighted sum of
firing clauses and prediction is the arg-max.  Training gives the sampled
target class recognise-type feedback and one uniformly drawn other class
reject-type feedback, gated by the clipped scores.

Automaton states are bytes: state 1..256 stored as ``state - 1``; a literal
is included in a clause iff its stored byte is at least 128 (``n_states``
boundary with 128 states per action side).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _tm_kernels as _k
from .rng import TAG_TM_FEEDBACK, TAG_TM_NEGATIVE, TAG_TM_SHUFFLE, TAG_TM_WEIGHTS, spawn, stream_seed

__all__ = ["TMConfig", "CoalescedTM"]

_N_STATES = 128  # boundary; stored byte >= _N_STATES means "include"


@dataclass(frozen=True)
class TMConfig:
    """Hyperparameters and shapes of one machine.

    Attributes:
        n_clauses: Size of the shared clause pool.
        threshold: Feedback target T; scores are clipped to [-T, T] when
            computing feedback probabilities.
        specificity: s > 1; literal updates happen at rates 1/s and (s-1)/s.
        max_literals: Per-clause cap on included literals.
        n_classes: Number of output classes (>= 2).
        n_features: Input width; the literal space is twice this.
        n_states: States per action side; fixed at 128 (byte-stored states).
    """

    n_clauses: int
    threshold: int
    specificity: float
    max_literals: int
    n_classes: int
    n_features: int
    n_states: int = _N_STATES

    def __post_init__(self):
        if self.n_clauses < 1:
            raise ValueError(f"n_clauses must be >= 1, got {self.n_clauses}")
        if self.threshold < 1:
            raise ValueError(f"threshold must be >= 1, got {self.threshold}")
        if not self.specificity > 1.0:
            raise ValueError(f"specificity must be > 1, got {self.specificity}")
        if not 1 <= self.max_literals <= 2 * self.n_features:
            raise ValueError(
                f"max_literals must be in [1, {2 * self.n_features}], got {self.max_literals}"
            )
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")
        if self.n_states != _N_STATES:
            raise ValueError(f"byte-stored automata require n_states == {_N_STATES}")


class CoalescedTM:
    """A trainable machine; all state lives in numpy arrays.

    The stored layout is bit-sliced (8 uint64 planes per clause, plane 7 being
    the include mask); :meth:`stored_states` materialises the conventional
    per-literal byte view for inspection and serialization.
    """

    def __init__(self, config: TMConfig, seed: int):
        self.config = config
        self.seed = int(seed)
        f = config.n_features
        self.words_half = (f + 63) // 64
        self.n_words = 2 * self.words_half

        # valid-literal mask (tail bits of each half are dead)
        valid = np.zeros(self.n_words, dtype=np.uint64)
        full, rem = divmod(f, 64)
        valid[:full] = ~np.uint64(0)
        if rem:
            valid[full] = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
        valid[self.words_half :] = valid[: self.words_half]
        valid.setflags(write=False)
        self.valid = valid

        # every real literal starts at the exclude boundary (stored 127)
        planes = np.zeros((config.n_clauses, 8, self.n_words), dtype=np.uint64)
        planes[:, :7, :] = valid[np.newaxis, np.newaxis, :]
        self.planes = planes
        self.inc_count = np.zeros(config.n_clauses, dtype=np.int64)

        # balanced ±1 weight init per class
        wrng = spawn(seed, TAG_TM_WEIGHTS)
        weights = np.ones((config.n_classes, config.n_clauses), dtype=np.int64)
        for c in range(config.n_classes):
            perm = wrng.permutation(config.n_clauses)
            weights[c, perm[: config.n_clauses // 2]] = -1
        self.weights = weights

        self._feedback_seed = np.uint64(stream_seed(seed, TAG_TM_FEEDBACK))
        self._neg_rng = spawn(seed, TAG_TM_NEGATIVE)
        self._shuffle_rng = spawn(seed, TAG_TM_SHUFFLE)
        self._counter = 0
        prob, alias = _k.build_geometric_alias(1.0 / config.specificity)
        self._geo_prob = prob
        self._geo_alias = alias
        self._out = np.empty(config.n_clauses, dtype=np.uint8)
        self._newinc = np.empty(self.n_words, dtype=np.uint64)
        self.debug = False

    # -- input packing ------------------------------------------------------

    def pack_input(self, x) -> NDArray[np.uint64]:
        """Pack a 0/1 feature row into literal words (features then negations)."""
        arr = np.asarray(x)
        if arr.shape != (self.config.n_features,):
            raise ValueError(f"input shape {arr.shape} != ({self.config.n_features},)")
        return self._pack_rows(arr.reshape(1, -1))[0]

    def _pack_rows(self, rows: np.ndarray) -> NDArray[np.uint64]:
        rows = np.ascontiguousarray(rows, dtype=np.uint8)
        n = rows.shape[0]
        packed = np.packbits(rows, axis=1, bitorder="little")
        padded = np.zeros((n, self.words_half * 8), dtype=np.uint8)
        padded[:, : packed.shape[1]] = packed
        pos = padded.view("<u8")
        lit = np.empty((n, self.n_words), dtype=np.uint64)
        lit[:, : self.words_half] = pos
        lit[:, self.words_half :] = ~pos & self.valid[: self.words_half]
        return lit

    # -- evaluation ---------------------------------------------------------

    def clause_eval(self, clause: int, x, train_mode: bool = False) -> int:
        """Readable single-clause route: test the conjunction literal by literal."""
        if not 0 <= clause < self.config.n_clauses:
            raise ValueError(f"clause {clause} outside [0, {self.config.n_clauses - 1}]")
        arr = np.asarray(x)
        if arr.shape != (self.config.n_features,):
            raise ValueError(f"input shape {arr.shape} != ({self.config.n_features},)")
        lits = self.included_literals(clause)
        if not lits:
            return 1 if train_mode else 0
        f = self.config.n_features
        for l in lits:
            value = int(arr[l]) if l < f else 1 - int(arr[l - f])
            if value == 0:
                return 0
        return 1

    def clause_outputs(self, x, train_mode: bool = False) -> NDArray[np.uint8]:
        """Fast all-clause evaluation on one input row."""
        lit = self.pack_input(x)
        out = np.empty(self.config.n_clauses, dtype=np.uint8)
        _k.clause_outputs(self.planes, self.inc_count, lit, train_mode, out)
        return out

    def class_scores(self, x) -> NDArray[np.int64]:
        """Raw (unclipped) per-class sums of weighted clause outputs."""
        return self.weights @ self.clause_outputs(x, train_mode=False).astype(np.int64)

    def predict(self, x) -> int:
        """Arg-max class; ties resolve to the lowest class index."""
        return int(np.argmax(self.class_scores(x)))

    def predict_batch(self, X) -> NDArray[np.int64]:
        X = np.asarray(X)
        lits = self._pack_rows(X)
        out = self._out
        preds = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            _k.clause_outputs(self.planes, self.inc_count, lits[i], False, out)
            scores = self.weights @ out.astype(np.int64)
            preds[i] = int(np.argmax(scores))
        return preds

    # -- training -----------------------------------------------------------

    def fit_sample(self, x, target: int) -> None:
        """One stochastic update on one labelled sample."""
        if not 0 <= target < self.config.n_classes:
            raise ValueError(f"target {target} outside [0, {self.config.n_classes - 1}]")
        self._fit_packed_sample(self.pack_input(x), target)

    def _fit_packed_sample(self, lit: NDArray[np.uint64], target: int) -> None:
        neg = int(self._neg_rng.integers(0, self.config.n_classes - 1))
        if neg >= target:
            neg += 1
        self._counter += 1
        _k.fit_sample(
            self.planes,
            self.inc_count,
            self.weights,
            lit,
            self.valid,
            target,
            neg,
            self.config.threshold,
            self._geo_prob,
            self._geo_alias,
            self.config.max_literals,
            self._feedback_seed,
            np.uint64(self._counter),
            self._out,
            self._newinc,
        )
        if self.debug:
            self.assert_invariants()

    def fit_epoch(self, X, y, shuffle: bool = True) -> None:
        """One pass over the dataset: exactly one fit_sample call per row."""
        lits, labels = self._check_dataset(X, y)
        order = self._shuffle_rng.permutation(len(labels)) if shuffle else np.arange(len(labels))
        for i in order:
            self._fit_packed_sample(lits[i], int(labels[i]))

    def fit(self, X, y, epochs: int, shuffle: bool = True) -> None:
        """Train for several epochs, packing the dataset once."""
        if epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {epochs}")
        lits, labels = self._check_dataset(X, y)
        n = len(labels)
        for _ in range(epochs):
            order = self._shuffle_rng.permutation(n) if shuffle else np.arange(n)
            for i in order:
                self._fit_packed_sample(lits[i], int(labels[i]))

    def _check_dataset(self, X, y) -> tuple[NDArray[np.uint64], NDArray[np.int64]]:
        X = np.asarray(X)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("need a non-empty 2-d sample matrix")
        if y.shape != (X.shape[0],):
            raise ValueError(f"label shape {y.shape} != ({X.shape[0]},)")
        if X.shape[1] != self.config.n_features:
            raise ValueError(f"sample width {X.shape[1]} != {self.config.n_features}")
        if y.min() < 0 or y.max() >= self.config.n_classes:
            raise ValueError("labels outside [0, n_classes)")
        return self._pack_rows(X), y

    @property
    def samples_seen(self) -> int:
        return self._counter

    # -- introspection ------------------------------------------------------

    def stored_states(self) -> NDArray[np.uint8]:
        """Per-literal state bytes, shape (n_clauses, 2*n_features)."""
        cfg = self.config
        bits = np.unpackbits(
            self.planes.view(np.uint8), axis=-1, bitorder="little"
        ).reshape(cfg.n_clauses, 8, self.n_words * 64)
        weights = (1 << np.arange(8, dtype=np.uint16))[np.newaxis, :, np.newaxis]
        stored = (bits.astype(np.uint16) * weights).sum(axis=1).astype(np.uint8)
        f = cfg.n_features
        half = self.words_half * 64
        idx = np.concatenate([np.arange(f), half + np.arange(f)])
        return stored[:, idx]

    def set_stored_states(self, stored: NDArray[np.uint8]) -> None:
        """Load per-literal state bytes (inverse of :meth:`stored_states`)."""
        cfg = self.config
        stored = np.asarray(stored, dtype=np.uint8)
        if stored.shape != (cfg.n_clauses, 2 * cfg.n_features):
            raise ValueError(
                f"state shape {stored.shape} != {(cfg.n_clauses, 2 * cfg.n_features)}"
            )
        f = cfg.n_features
        half = self.words_half * 64
        wide = np.zeros((cfg.n_clauses, 2 * half), dtype=np.uint8)
        wide[:, :f] = stored[:, :f]
        wide[:, half : half + f] = stored[:, f:]
        planes = np.zeros_like(self.planes)
        for p in range(8):
            plane_bits = (wide >> p) & 1
            packed = np.packbits(plane_bits, axis=1, bitorder="little")
            planes[:, p, :] = packed.view("<u8")
        self.planes[...] = planes
        self.inc_count[...] = (stored >= _N_STATES).sum(axis=1)

    def included_literals(self, clause: int) -> list[int]:
        """Sorted literal indices currently included in ``clause``.

        Indices 0..F-1 are the plain features, F..2F-1 their negations.
        """
        if not 0 <= clause < self.config.n_clauses:
            raise ValueError(f"clause {clause} outside [0, {self.config.n_clauses - 1}]")
        f = self.config.n_features
        p7 = np.unpackbits(
            self.planes[clause, 7].view(np.uint8), bitorder="little"
        )
        half = self.words_half * 64
        pos = np.flatnonzero(p7[:half])
        neg = np.flatnonzero(p7[half:])
        return sorted(pos.tolist() + [f + i for i in neg.tolist()])

    def assert_invariants(self) -> None:
        """Structural checks: budget respected, include counts consistent,
        no state bits outside the valid literal positions."""
        cfg = self.config
        p7 = self.planes[:, 7, :]
        counts = np.bitwise_count(p7).sum(axis=1)
        if not np.array_equal(counts, self.inc_count):
            raise AssertionError("include plane and inc_count disagree")
        if (self.inc_count > cfg.max_literals).any():
            raise AssertionError("clause exceeds max_literals budget")
        dead = ~self.valid
        for p in range(8):
            if (self.planes[:, p, :] & dead).any():
                raise AssertionError(f"plane {p} has bits outside valid literals")
