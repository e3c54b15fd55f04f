"""Command-line interface.

Five subcommands: ``classify`` (random-search a labelled train/test pair),
``bench`` (sweep dataset directories against the 1-NN baseline), ``forecast``
(train on a series or a generator and roll out a horizon), ``generate``
(continue a context with a saved model), and ``eval`` (repeated-simulation
forecast benchmark across window sizes).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.  The
master seed comes from ``--seed``, else the ``HVTM_SEED`` environment
variable, else 42.  All file outputs are deterministic for a fixed seed;
``--no-timestamp`` drops the wall-clock fields so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import traceback
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .baseline import accuracy, one_nn_euclidean
from .data import (
    DataError,
    GeneratorSpec,
    load_series_csv,
    load_ucr,
    make_series,
    save_series_csv,
)
from .hv import hamming
from .model_io import load_model, save_model
from .pipeline import (
    HvParams,
    SearchSpec,
    TMParams,
    evaluate_forecasts,
    forecast_recursive,
    random_search,
    train_forecaster,
)

__all__ = ["main"]

DEFAULT_SEED = 42


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is 1
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(name):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {v}")
        return v

    return parse


def _coeff_list(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coefficient list {text!r}")


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _add_common(p: _Parser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default: HVTM_SEED or 42)")
    p.add_argument("--out", type=Path, default=None, help="output file base path")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="row-file format")
    p.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit wall-clock fields so reruns are byte-identical",
    )


def _add_hv(p: _Parser, dim=5000, ngram=3, quant=50) -> None:
    p.add_argument("--dim", type=_positive_int("--dim"), default=dim, help="hypervector dimension")
    p.add_argument("--ngram", type=_positive_int("--ngram"), default=ngram, help="window size")
    p.add_argument("--quant", type=_positive_int("--quant"), default=quant, help="bucket count")


def _add_tm(p: _Parser, clauses=1000, threshold=100, specificity=15.0, max_literals=50) -> None:
    p.add_argument("--clauses", type=_positive_int("--clauses"), default=clauses)
    p.add_argument("--threshold", type=_positive_int("--threshold"), default=threshold)
    p.add_argument("--specificity", type=float, default=specificity)
    p.add_argument("--max-literals", type=_positive_int("--max-literals"), default=max_literals)


def build_parser() -> _Parser:
    parser = _Parser(prog="hvtm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="random-search a train/test dataset pair")
    p.add_argument("train", type=Path, help="training file (UCR layout: label first)")
    p.add_argument("test", type=Path, help="test file")
    _add_hv(p)
    p.add_argument("--configs", type=_positive_int("--configs"), default=20)
    p.add_argument("--epochs", type=_positive_int("--epochs"), default=10)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="sweep dataset directories against the 1-NN baseline")
    p.add_argument("root", type=Path, help="directory of <name>/<name>_TRAIN.tsv pairs")
    p.add_argument("--datasets", type=str, default=None, help="comma-separated subset")
    _add_hv(p)
    p.add_argument("--configs", type=_positive_int("--configs"), default=20)
    p.add_argument("--epochs", type=_positive_int("--epochs"), default=10)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("forecast", help="train a forecaster and roll out a horizon")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV series to train on")
    src.add_argument(
        "--model",
        choices=("harmonic", "ar1", "arma11", "sar1"),
        help="synthetic generator to train on",
    )
    p.add_argument("--coeffs", type=_coeff_list, default=None, help="generator coefficients")
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--period", type=_positive_int("--period"), default=12)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--length", type=_positive_int("--length"), default=220, help="training length")
    p.add_argument("--horizon", type=_positive_int("--horizon"), default=24)
    p.add_argument("--reps", type=_positive_int("--reps"), default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5, help="memory blend weight")
    p.add_argument("--epochs", type=_positive_int("--epochs"), default=30)
    p.add_argument("--save-model", type=Path, default=None, help="write the trained model here")
    _add_hv(p, ngram=5, quant=12)
    _add_tm(p)
    _add_common(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("generate", help="continue a context series with a saved model")
    p.add_argument("model_file", type=Path)
    p.add_argument("context", type=Path, help="CSV series; the last window seeds generation")
    p.add_argument("--horizon", type=_positive_int("--horizon"), default=24)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="repeated-simulation forecast benchmark")
    p.add_argument(
        "--model",
        required=True,
        choices=("harmonic", "ar1", "arma11", "sar1"),
    )
    p.add_argument("--coeffs", type=_coeff_list, default=None)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--period", type=_positive_int("--period"), default=12)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--length", type=_positive_int("--length"), default=220)
    p.add_argument("--horizon", type=_positive_int("--horizon"), default=24)
    p.add_argument("--reps", type=_positive_int("--reps"), default=20)
    p.add_argument("--ngrams", type=_int_list, default=(3, 5, 7), help="window sizes to sweep")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--epochs", type=_positive_int("--epochs"), default=30)
    _add_hv(p, ngram=5, quant=12)
    _add_tm(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval)
    return parser


# -- output helpers ---------------------------------------------------------


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HVTM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HVTM_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: Path | None, fmt: str, header: list[str], rows: list[list]) -> None:
    if path is None:
        return
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])


def _emit_summary(args, summary: dict, started: float) -> None:
    if not args.no_timestamp:
        summary["elapsed_seconds"] = round(time.time() - started, 3)
        summary["created_unix"] = round(started, 3)
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        Path(str(args.out) + ".json").write_text(text)


def _rows_path(args) -> Path | None:
    if args.out is None:
        return None
    return Path(str(args.out) + ("." + args.format))


# -- commands ---------------------------------------------------------------


def cmd_classify(args) -> int:
    started = time.time()
    seed = _seed_of(args)
    train, mapping = load_ucr(args.train)
    test, test_mapping = load_ucr(args.test)
    if test_mapping != mapping:
        raise DataError(
            f"label sets differ between {args.train} ({sorted(mapping)}) "
            f"and {args.test} ({sorted(test_mapping)})"
        )
    hv = HvParams(dim=args.dim, ngram=args.ngram, quant=args.quant)
    spec = SearchSpec(n_configs=args.configs, epochs=args.epochs)
    report = random_search(train, test, hv, spec, seed)
    header = ["index", "n_clauses", "max_literals", "specificity", "threshold", "accuracy", "error"]
    rows = [
        [r.index, r.n_clauses, r.max_literals, r.specificity, r.threshold, r.accuracy, r.error]
        for r in report.rows
    ]
    _write_rows(_rows_path(args), args.format, header, rows)
    summary = {
        "command": "classify",
        "train_file": str(args.train),
        "test_file": str(args.test),
        "n_train": len(train),
        "n_test": len(test),
        "n_classes": len(mapping),
        "label_mapping": {str(k): v for k, v in sorted(mapping.items())},
        "hv": asdict(hv),
        "n_configs": args.configs,
        "epochs": args.epochs,
        "seed": seed,
        "headline_accuracy": report.headline,
    }
    _emit_summary(args, summary, started)
    return 0


def _discover_datasets(root: Path, subset: list[str] | None) -> list[str]:
    if not root.is_dir():
        raise DataError(f"dataset root not found: {root}")
    if subset:
        return sorted(subset)
    names = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and _find_split(child, child.name, "TRAIN") is not None:
            names.append(child.name)
    if not names:
        raise DataError(f"no dataset directories under {root}")
    return names


def _find_split(d: Path, name: str, part: str) -> Path | None:
    for suffix in (".tsv", ".txt", ""):
        cand = d / f"{name}_{part}{suffix}"
        if cand.is_file():
            return cand
    return None


def cmd_bench(args) -> int:
    started = time.time()
    seed = _seed_of(args)
    subset = [s.strip() for s in args.datasets.split(",")] if args.datasets else None
    names = _discover_datasets(args.root, subset)
    hv = HvParams(dim=args.dim, ngram=args.ngram, quant=args.quant)
    spec = SearchSpec(n_configs=args.configs, epochs=args.epochs)
    header = [
        "dataset", "n_train", "n_test", "length", "n_classes",
        "hvtm_accuracy", "baseline_accuracy", "error",
    ]
    rows = []
    for name in names:  # one worker: single-core host
        try:
            d = args.root / name
            train_path = _find_split(d, name, "TRAIN")
            test_path = _find_split(d, name, "TEST")
            if train_path is None or test_path is None:
                raise DataError(f"dataset {name}: missing TRAIN/TEST files under {d}")
            train, mapping = load_ucr(train_path)
            test, _ = load_ucr(test_path)
            report = random_search(train, test, hv, spec, seed)
            base = accuracy(one_nn_euclidean(train, test), [s.label for s in test])
            rows.append([
                name, len(train), len(test), len(train[0].values), len(mapping),
                report.headline, base, None,
            ])
        except Exception as e:  # noqa: BLE001 - per-dataset isolation is the contract
            rows.append([name, None, None, None, None, None, None, f"{type(e).__name__}: {e}"])
    _write_rows(_rows_path(args), args.format, header, rows)
    summary = {
        "command": "bench",
        "root": str(args.root),
        "datasets": names,
        "hv": asdict(hv),
        "n_configs": args.configs,
        "epochs": args.epochs,
        "seed": seed,
        "results": {
            row[0]: {"hvtm": row[5], "baseline": row[6], "error": row[7]} for row in rows
        },
    }
    _emit_summary(args, summary, started)
    return 0


def _generator_spec(args) -> GeneratorSpec:
    return GeneratorSpec(
        kind=args.model,
        params=tuple(args.coeffs) if args.coeffs else (),
        noise_sd=args.noise_sd,
        length=args.length,
        period=args.period,
        dt=args.dt,
    )


def cmd_forecast(args) -> int:
    started = time.time()
    seed = _seed_of(args)
    hv = HvParams(dim=args.dim, ngram=args.ngram, quant=args.quant)
    params = TMParams(
        n_clauses=args.clauses,
        threshold=args.threshold,
        specificity=args.specificity,
        max_literals=args.max_literals,
    )
    if args.reps > 1:
        if args.input is not None:
            raise UsageError("--reps needs --model: repetitions resimulate the generator")
        if args.save_model is not None:
            raise UsageError("--save-model only applies to a single run (--reps 1)")
        spec = _generator_spec(args)
        result = evaluate_forecasts(
            spec, hv, params, seed,
            reps=args.reps, horizon=args.horizon, lam=args.lam, epochs=args.epochs,
        )
        header = [
            "model", "coeffs", "noise_sd", "length", "ngram", "reps", "horizon",
            "lambda", "mean_error", "std_error", "mean_mae", "mean_rmse",
        ]
        rows = [[
            spec.kind, ",".join(repr(c) for c in spec.params), spec.noise_sd, spec.length,
            hv.ngram, result.reps, result.horizon, args.lam,
            result.mean_error, result.std_error, result.mean_mae, result.mean_rmse,
        ]]
        _write_rows(_rows_path(args), args.format, header, rows)
        summary = {
            "command": "forecast",
            "model": spec.kind,
            "coeffs": list(spec.params),
            "ngram": hv.ngram,
            "reps": result.reps,
            "horizon": result.horizon,
            "lambda": args.lam,
            "seed": seed,
            "mean_error": result.mean_error,
            "std_error": result.std_error,
            "mean_mae": result.mean_mae,
            "mean_rmse": result.mean_rmse,
        }
        _emit_summary(args, summary, started)
        return 0

    truth = None
    if args.input is not None:
        series = load_series_csv(args.input)
        source = str(args.input)
    else:
        spec = _generator_spec(args)
        full = make_series(spec, args.length + args.horizon, seed)
        series = full[: args.length]
        truth = full[args.length :]
        source = f"{spec.kind}({','.join(repr(c) for c in spec.params)})"
    model = train_forecaster([series], hv, params, args.lam, seed, epochs=args.epochs)
    preds = forecast_recursive(model, series[-hv.ngram :], args.horizon)
    if args.save_model is not None:
        save_model(model, args.save_model)
    header = ["step", "forecast"] + (["truth", "abs_error"] if truth is not None else [])
    rows = []
    for t in range(args.horizon):
        row = [t + 1, float(preds[t])]
        if truth is not None:
            row += [float(truth[t]), abs(float(preds[t]) - float(truth[t]))]
        rows.append(row)
    _write_rows(_rows_path(args), args.format, header, rows)
    summary = {
        "command": "forecast",
        "source": source,
        "n_train": len(series),
        "ngram": hv.ngram,
        "horizon": args.horizon,
        "lambda": args.lam,
        "seed": seed,
        "model_saved": str(args.save_model) if args.save_model else None,
    }
    if truth is not None:
        e = model.norm.apply(preds) - model.norm.apply(truth)
        summary["error"] = float(np.sqrt((e**2).sum()) / args.horizon)
        summary["mae"] = float(np.abs(e).mean())
        summary["rmse"] = float(np.sqrt((e**2).mean()))
    _emit_summary(args, summary, started)
    return 0


def cmd_generate(args) -> int:
    started = time.time()
    model = load_model(args.model_file)
    if model.mode != "forecast":
        raise UsageError(f"{args.model_file} is a {model.mode} model; generation needs a forecast model")
    context = load_series_csv(args.context)
    n = model.basis.n
    if len(context) < n:
        raise DataError(
            f"context has {len(context)} values; the model needs at least {n}"
        )
    generated = forecast_recursive(model, context[-n:], args.horizon)
    if args.out is not None:
        save_series_csv(Path(str(args.out) + ".csv"), generated)
    d_h = None
    if args.horizon >= n:
        enc = model.encoder
        hv_gen = enc.encode(model.norm.apply(generated))
        hv_ctx = enc.encode(model.norm.apply(context))
        d_h = hamming(hv_gen, hv_ctx)
    summary = {
        "command": "generate",
        "model_file": str(args.model_file),
        "context_file": str(args.context),
        "context_length": len(context),
        "horizon": args.horizon,
        "dim": model.emb.dim,
        "d_h_generated_vs_context": d_h,
        "half_dim": model.emb.dim / 2,
    }
    _emit_summary(args, summary, started)
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    seed = _seed_of(args)
    if not args.ngrams:
        raise UsageError("--ngrams must name at least one window size")
    params = TMParams(
        n_clauses=args.clauses,
        threshold=args.threshold,
        specificity=args.specificity,
        max_literals=args.max_literals,
    )
    spec = _generator_spec(args)
    header = [
        "model", "coeffs", "noise_sd", "length", "ngram", "reps", "horizon",
        "lambda", "mean_error", "std_error", "mean_mae", "mean_rmse",
    ]
    rows = []
    by_ngram = {}
    for n in args.ngrams:
        hv = HvParams(dim=args.dim, ngram=n, quant=args.quant)
        result = evaluate_forecasts(
            spec, hv, params, seed,
            reps=args.reps, horizon=args.horizon, lam=args.lam, epochs=args.epochs,
        )
        rows.append([
            spec.kind, ",".join(repr(c) for c in spec.params), spec.noise_sd, spec.length,
            n, result.reps, result.horizon, args.lam,
            result.mean_error, result.std_error, result.mean_mae, result.mean_rmse,
        ])
        by_ngram[str(n)] = {
            "mean_error": result.mean_error,
            "std_error": result.std_error,
            "mean_mae": result.mean_mae,
            "mean_rmse": result.mean_rmse,
        }
    _write_rows(_rows_path(args), args.format, header, rows)
    summary = {
        "command": "eval",
        "model": spec.kind,
        "coeffs": list(spec.params),
        "noise_sd": spec.noise_sd,
        "length": spec.length,
        "reps": args.reps,
        "horizon": args.horizon,
        "lambda": args.lam,
        "seed": seed,
        "by_ngram": by_ngram,
    }
    _emit_summary(args, summary, started)
    return 0


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as e:  # noqa: BLE001 - last-resort mapping to exit code 3
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
