"""Reference classifier: one-nearest-neighbour under Euclidean distance."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .data import LabeledSeries

__all__ = ["one_nn_euclidean", "accuracy"]


def one_nn_euclidean(
    train: Sequence[LabeledSeries], test: Sequence[LabeledSeries]
) -> NDArray[np.int64]:
    """Predict each test label from its Euclidean-nearest training series.

    All series must share one length; distance ties resolve to the earliest
    training series.
    """
    if not train or not test:
        raise ValueError("need non-empty train and test sets")
    lengths = {len(s.values) for s in train} | {len(s.values) for s in test}
    if len(lengths) != 1:
        raise ValueError(f"series lengths differ: {sorted(lengths)}")
    X = np.vstack([s.values for s in train])
    labels = np.asarray([s.label for s in train], dtype=np.int64)
    preds = np.empty(len(test), dtype=np.int64)
    for i, s in enumerate(test):
        d2 = ((X - s.values) ** 2).sum(axis=1)
        preds[i] = labels[int(np.argmin(d2))]
    return preds


def accuracy(preds: NDArray[np.int64], truth: Sequence[int]) -> float:
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ValueError(f"shape mismatch {preds.shape} vs {truth.shape}")
    return float((preds == truth).mean())
