"""End-to-end models: train, classify, search, forecast, evaluate.

A model couples one scalar quantizer + gram basis (built from the master
seed), the min-max transform of its training data, a trained machine, and —
for forecasting — an associative memory over training windows.  Forecasts
blend the memory's retrieved successor with the machine's predicted bucket
midpoint: ``lam * memory + (1 - lam) * machine``, fed back recursively for
multi-step horizons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .data import GeneratorSpec, LabeledSeries, MinMaxTransform, make_series, normalize
from .encoding import GramBasis, IntervalEmbedding, SeriesEncoder, decode_bucket
from .hv import Hypervector, random_hv
from .memory import AssociativeMemory
from .rng import TAG_EVAL, TAG_SEARCH, TAG_TIE_BREAK, spawn, stream_seed
from .tm import CoalescedTM, TMConfig

__all__ = [
    "HvParams",
    "TMParams",
    "SearchSpec",
    "ConfigResult",
    "SearchReport",
    "HvtmModel",
    "train_classifier",
    "classify",
    "random_search",
    "train_forecaster",
    "forecast_step",
    "forecast_recursive",
    "ForecastEval",
    "evaluate_forecasts",
]


@dataclass(frozen=True)
class HvParams:
    """Hypervector-side shape: dimension, window size, bucket count."""

    dim: int = 5000
    ngram: int = 3
    quant: int = 50

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError(f"dim must be >= 8, got {self.dim}")
        if self.ngram < 1:
            raise ValueError(f"ngram must be >= 1, got {self.ngram}")
        if self.quant < 2:
            raise ValueError(f"quant must be >= 2, got {self.quant}")


@dataclass(frozen=True)
class TMParams:
    """Machine hyperparameters chosen per task (shapes come from the data)."""

    n_clauses: int = 1000
    threshold: int = 100
    specificity: float = 15.0
    max_literals: int = 50


@dataclass
class HvtmModel:
    """A trained model and everything needed to run or re-serialize it."""

    mode: str  # "classify" or "forecast"
    master_seed: int
    emb: IntervalEmbedding
    basis: GramBasis
    tie: Hypervector
    norm: MinMaxTransform
    tm: CoalescedTM
    mem: AssociativeMemory | None = None
    lam: float = 0.5
    _enc: SeriesEncoder | None = field(default=None, repr=False, compare=False)

    @property
    def encoder(self) -> SeriesEncoder:
        if self._enc is None:
            self._enc = SeriesEncoder(self.emb, self.basis, self.tie)
        return self._enc


def _build_spaces(seed: int, hv: HvParams) -> tuple[IntervalEmbedding, GramBasis, Hypervector]:
    emb = IntervalEmbedding.build(-1.0, 1.0, hv.quant, hv.dim, seed)
    basis = GramBasis.build(hv.ngram, hv.dim, seed)
    tie = random_hv(spawn(seed, TAG_TIE_BREAK), hv.dim)
    return emb, basis, tie


def _check_labels(train: Sequence[LabeledSeries]) -> int:
    if not train:
        raise ValueError("empty training set")
    labels = np.asarray([s.label for s in train])
    n_classes = int(labels.max()) + 1
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    counts = np.bincount(labels, minlength=n_classes)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise ValueError(f"class {int(missing[0])} has zero samples")
    return n_classes


def _encode_set(
    enc: SeriesEncoder, series: Sequence[NDArray[np.float64]]
) -> NDArray[np.uint8]:
    """Whole-series vectors of every series, unpacked to a 0/1 matrix."""
    dim = enc.dim
    rows = np.empty((len(series), dim), dtype=np.uint8)
    for i, s in enumerate(series):
        rows[i] = enc.encode(s).to_bools()
    return rows


def train_classifier(
    train: Sequence[LabeledSeries],
    hv: HvParams,
    params: TMParams,
    seed: int,
    epochs: int = 10,
) -> HvtmModel:
    """Fit a classification model on labelled series.

    Training data is jointly min-max scaled onto [-1, 1]; that transform, the
    quantizer over [-1, 1], and the trained machine make up the model.

    Raises:
        ValueError: On fewer than 2 classes, a class with zero samples, or a
            series shorter than the window size (the offending index is named).
    """
    n_classes = _check_labels(train)
    for i, s in enumerate(train):
        if len(s.values) < hv.ngram:
            raise ValueError(
                f"series {i} has length {len(s.values)} < window size {hv.ngram}"
            )
    normed, tr = normalize([s.values for s in train])
    emb, basis, tie = _build_spaces(seed, hv)
    enc = SeriesEncoder(emb, basis, tie)
    X = _encode_set(enc, normed)
    y = np.asarray([s.label for s in train], dtype=np.int64)
    cfg = TMConfig(
        n_clauses=params.n_clauses,
        threshold=params.threshold,
        specificity=params.specificity,
        max_literals=params.max_literals,
        n_classes=n_classes,
        n_features=hv.dim,
    )
    tm = CoalescedTM(cfg, seed)
    tm.fit(X, y, epochs=epochs)
    return HvtmModel("classify", int(seed), emb, basis, tie, tr, tm, _enc=enc)


def classify(model: HvtmModel, series: Sequence[float]) -> int:
    """Predict the class of one raw series (training-set scaling applied)."""
    if model.mode != "classify":
        raise ValueError(f"model was trained for {model.mode}, not classification")
    if len(series) < model.basis.n:
        raise ValueError(
            f"series has length {len(series)} < window size {model.basis.n}"
        )
    x = model.encoder.encode(model.norm.apply(series)).to_bools()
    return model.tm.predict(x)


@dataclass(frozen=True)
class SearchSpec:
    """Random-search space: 20 draws over the standard protocol ranges."""

    n_configs: int = 20
    epochs: int = 10
    clauses: tuple[int, int] = (100, 2000)
    max_literals: tuple[int, int] = (10, 100)
    specificity: tuple[float, float] = (10.0, 20.0)
    threshold: tuple[int, int] = (1, 100)

    def __post_init__(self):
        if self.n_configs < 1:
            raise ValueError(f"n_configs must be >= 1, got {self.n_configs}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        for name in ("clauses", "max_literals", "specificity", "threshold"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range ({lo}, {hi}) has lo > hi")
        if self.threshold[0] < 1:
            raise ValueError("threshold range must start at 1 or above")
        if self.specificity[0] <= 1.0:
            raise ValueError("specificity range must stay above 1")


@dataclass(frozen=True)
class ConfigResult:
    index: int
    n_clauses: int
    max_literals: int
    specificity: float
    threshold: int
    accuracy: float | None
    error: str | None = None


@dataclass(frozen=True)
class SearchReport:
    rows: tuple[ConfigResult, ...]

    @property
    def headline(self) -> float | None:
        """Best test accuracy over all completed configs."""
        accs = [r.accuracy for r in self.rows if r.accuracy is not None]
        return max(accs) if accs else None

    def best(self) -> ConfigResult:
        ok = [r for r in self.rows if r.accuracy is not None]
        if not ok:
            raise ValueError("every configuration failed")
        return max(ok, key=lambda r: r.accuracy)


def random_search(
    train: Sequence[LabeledSeries],
    test: Sequence[LabeledSeries],
    hv: HvParams,
    spec: SearchSpec,
    seed: int,
) -> SearchReport:
    """Random hyperparameter search for classification.

    The hypervector spaces and encodings are shared by every configuration
    (they depend only on the seed), so each draw costs one machine training
    plus a test sweep.  A configuration that fails keeps its error message in
    its row; the search continues.
    """
    n_classes = _check_labels(train)
    for name, group in (("train", train), ("test", test)):
        for i, s in enumerate(group):
            if len(s.values) < hv.ngram:
                raise ValueError(
                    f"{name} series {i} has length {len(s.values)} < window size {hv.ngram}"
                )
    if not test:
        raise ValueError("empty test set")
    if max(s.label for s in test) >= n_classes:
        raise ValueError("test labels outside the training classes")
    normed, tr = normalize([s.values for s in train])
    emb, basis, tie = _build_spaces(seed, hv)
    enc = SeriesEncoder(emb, basis, tie)
    Xtr = _encode_set(enc, normed)
    ytr = np.asarray([s.label for s in train], dtype=np.int64)
    Xte = _encode_set(enc, [tr.apply(s.values) for s in test])
    yte = np.asarray([s.label for s in test], dtype=np.int64)

    srng = spawn(seed, TAG_SEARCH)
    rows = []
    for i in range(spec.n_configs):
        n_clauses = int(srng.integers(spec.clauses[0], spec.clauses[1] + 1))
        max_lit = int(srng.integers(spec.max_literals[0], spec.max_literals[1] + 1))
        s_val = float(srng.uniform(spec.specificity[0], spec.specificity[1]))
        t_val = int(srng.integers(spec.threshold[0], spec.threshold[1] + 1))
        try:
            cfg = TMConfig(
                n_clauses=n_clauses,
                threshold=t_val,
                specificity=s_val,
                max_literals=max_lit,
                n_classes=n_classes,
                n_features=hv.dim,
            )
            tm = CoalescedTM(cfg, stream_seed(seed, TAG_SEARCH, i))
            tm.fit(Xtr, ytr, epochs=spec.epochs)
            acc = float((tm.predict_batch(Xte) == yte).mean())
            rows.append(ConfigResult(i, n_clauses, max_lit, s_val, t_val, acc))
        except Exception as e:  # noqa: BLE001 - per-config isolation is the contract
            rows.append(
                ConfigResult(i, n_clauses, max_lit, s_val, t_val, None, f"{type(e).__name__}: {e}")
            )
    return SearchReport(tuple(rows))


def train_forecaster(
    series_set: Sequence[NDArray[np.float64]],
    hv: HvParams,
    params: TMParams,
    lam: float,
    seed: int,
    epochs: int = 10,
) -> HvtmModel:
    """Fit a forecasting model on one or more raw series.

    Every window that has a next value becomes an associative-memory entry
    (key -> successor bucket and value) and a training sample for the machine
    (window key -> successor bucket as the class).

    Raises:
        ValueError: On an out-of-range ``lam`` or a series shorter than
            window size + 1 (the offending index is named).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must be in [0, 1], got {lam}")
    if not series_set:
        raise ValueError("empty series set")
    for i, s in enumerate(series_set):
        if len(np.asarray(s)) < hv.ngram + 1:
            raise ValueError(
                f"series {i} has length {len(np.asarray(s))} < window size + 1 = {hv.ngram + 1}"
            )
    normed, tr = normalize(series_set)
    emb, basis, tie = _build_spaces(seed, hv)
    enc = SeriesEncoder(emb, basis, tie)
    mem = AssociativeMemory.build(emb, basis, normed)
    key_blocks = []
    label_blocks = []
    for s in normed:
        keys, succ_b, _ = enc.windows_with_successors(s)
        key_blocks.append(keys)
        label_blocks.append(succ_b)
    keys = np.vstack(key_blocks)
    y = np.concatenate(label_blocks)
    X = np.unpackbits(keys, axis=1, count=hv.dim, bitorder="little")
    cfg = TMConfig(
        n_clauses=params.n_clauses,
        threshold=params.threshold,
        specificity=params.specificity,
        max_literals=params.max_literals,
        n_classes=hv.quant,
        n_features=hv.dim,
    )
    tm = CoalescedTM(cfg, seed)
    tm.fit(X, y, epochs=epochs)
    return HvtmModel("forecast", int(seed), emb, basis, tie, tr, tm, mem=mem, lam=lam, _enc=enc)


def forecast_step(model: HvtmModel, context: Sequence[float]) -> float:
    """Predict the value following a window of ``ngram`` raw observations.

    The context is scaled like the training data; the memory's retrieved
    successor and the machine's predicted bucket midpoint are blended with
    weight ``lam`` on the memory; the blend is mapped back to data units.
    """
    if model.mode != "forecast":
        raise ValueError(f"model was trained for {model.mode}, not forecasting")
    n = model.basis.n
    if len(context) != n:
        raise ValueError(f"context length {len(context)} != window size {n}")
    values = model.norm.apply(context)
    key = model.encoder.key_of_window(values)
    s_mem = model.mem.retrieve_packed(key.bits).value
    bucket = model.tm.predict(key.to_bools())
    s_tm = decode_bucket(model.emb, bucket)
    blended = model.lam * s_mem + (1.0 - model.lam) * s_tm
    return float(model.norm.invert(blended))


def forecast_recursive(
    model: HvtmModel, context: Sequence[float], horizon: int
) -> NDArray[np.float64]:
    """Roll :func:`forecast_step` forward ``horizon`` steps.

    Each prediction is appended to the context (oldest value dropped), so
    later steps see earlier forecasts, blended values included.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    ctx = np.asarray(context, dtype=np.float64).copy()
    out = np.empty(horizon, dtype=np.float64)
    for t in range(horizon):
        y = forecast_step(model, ctx)
        out[t] = y
        ctx = np.append(ctx[1:], y)
    return out


@dataclass(frozen=True)
class ForecastEval:
    """Repeated-simulation forecast benchmark results (normalized-space errors)."""

    spec: GeneratorSpec
    reps: int
    horizon: int
    errors: tuple[float, ...]
    maes: tuple[float, ...]
    rmses: tuple[float, ...]

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))

    @property
    def std_error(self) -> float:
        return float(np.std(self.errors, ddof=1)) if self.reps > 1 else 0.0

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.maes))

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.rmses))


def evaluate_forecasts(
    spec: GeneratorSpec,
    hv: HvParams,
    params: TMParams,
    seed: int,
    reps: int = 50,
    horizon: int = 24,
    lam: float = 0.5,
    epochs: int = 10,
) -> ForecastEval:
    """Train-and-forecast ``reps`` fresh simulations and aggregate errors.

    Each repetition simulates ``spec.length + horizon`` values, trains a
    forecaster on the first ``spec.length``, rolls out ``horizon`` recursive
    forecasts, and scores them against the held-out tail in the model's
    normalized space.  The headline error is ``sqrt(sum(e^2)) / horizon``;
    MAE and RMSE are kept alongside.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    errors = []
    maes = []
    rmses = []
    for r in range(reps):
        data_seed = stream_seed(seed, TAG_EVAL, r, 1)
        model_seed = stream_seed(seed, TAG_EVAL, r, 2)
        full = make_series(spec, spec.length + horizon, data_seed)
        train = full[: spec.length]
        truth = full[spec.length :]
        model = train_forecaster([train], hv, params, lam, model_seed, epochs=epochs)
        preds = forecast_recursive(model, train[-hv.ngram :], horizon)
        e = model.norm.apply(preds) - model.norm.apply(truth)
        errors.append(float(np.sqrt((e**2).sum()) / horizon))
        maes.append(float(np.abs(e).mean()))
        rmses.append(float(np.sqrt((e**2).mean())))
    return ForecastEval(spec, reps, horizon, tuple(errors), tuple(maes), tuple(rmses))
