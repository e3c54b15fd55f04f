"""Hypervector time-series toolkit.

Series are quantized into bucket hypervectors, windows of consecutive
buckets are folded into n-gram key vectors, and those keys drive a coalesced
weighted Tsetlin machine (classification, next-bucket prediction) and a
Hamming associative memory (successor retrieval).  Forecasting blends both
routes and feeds the result back for multi-step horizons.
"""
from .hv import Hypervector, bind, bundle, hamming, permute, random_hv
from .encoding import (
    GramBasis,
    IntervalEmbedding,
    SeriesEncoder,
    decode_bucket,
    embed_scalar,
    encode_sequence,
    encode_series,
    ngram_hv,
)
from .memory import AssociativeMemory, Retrieval
from .tm import CoalescedTM, TMConfig
from .data import (
    DataError,
    GeneratorSpec,
    LabeledSeries,
    MinMaxTransform,
    gen_ar1,
    gen_arma11,
    gen_harmonic,
    gen_sar1,
    load_ucr,
    make_series,
    normalize,
)
from .baseline import one_nn_euclidean
from .pipeline import (
    ForecastEval,
    HvParams,
    HvtmModel,
    SearchReport,
    SearchSpec,
    TMParams,
    classify,
    evaluate_forecasts,
    forecast_recursive,
    forecast_step,
    random_search,
    train_classifier,
    train_forecaster,
)
from .model_io import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "Hypervector",
    "bind",
    "bundle",
    "hamming",
    "permute",
    "random_hv",
    "GramBasis",
    "IntervalEmbedding",
    "SeriesEncoder",
    "decode_bucket",
    "embed_scalar",
    "encode_sequence",
    "encode_series",
    "ngram_hv",
    "AssociativeMemory",
    "Retrieval",
    "CoalescedTM",
    "TMConfig",
    "DataError",
    "GeneratorSpec",
    "LabeledSeries",
    "MinMaxTransform",
    "gen_ar1",
    "gen_arma11",
    "gen_harmonic",
    "gen_sar1",
    "load_ucr",
    "make_series",
    "normalize",
    "one_nn_euclidean",
    "ForecastEval",
    "HvParams",
    "HvtmModel",
    "SearchReport",
    "SearchSpec",
    "TMParams",
    "classify",
    "evaluate_forecasts",
    "forecast_recursive",
    "forecast_step",
    "random_search",
    "train_classifier",
    "train_forecaster",
    "load_model",
    "save_model",
    "__version__",
]
