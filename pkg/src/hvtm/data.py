"""Dataset loading, normalization, and synthetic series generators.

Generators draw their Gaussian innovations by inverse-CDF transform of PCG64
uniforms (Wichura's AS241 rational approximation, via
``statistics.NormalDist.inv_cdf``) so the streams are bit-stable across
platforms and library versions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .rng import TAG_GENERATOR, spawn

__all__ = [
    "LabeledSeries",
    "DataError",
    "load_ucr",
    "MinMaxTransform",
    "normalize",
    "gaussian",
    "gen_harmonic",
    "gen_ar1",
    "gen_arma11",
    "gen_sar1",
    "GeneratorSpec",
    "make_series",
    "save_series_csv",
    "load_series_csv",
]

_NA_TOKENS = {"nan", "na", "?", "null", ""}
_NORM = NormalDist()


class DataError(Exception):
    """A dataset file is missing, malformed, or self-inconsistent."""


@dataclass(frozen=True)
class LabeledSeries:
    label: int
    values: NDArray[np.float64]


def load_ucr(path: str | Path) -> tuple[list[LabeledSeries], dict[int, int]]:
    """Parse a UCR-style file: one series per line, label first.

    Tab- and comma-separated files are both accepted.  Labels are remapped to
    contiguous ``0..C-1`` (ascending original order); the mapping
    original -> contiguous is returned alongside the series.

    Raises:
        DataError: On a missing file, an unparseable or NA token (with its
            line number), or an empty file.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    rows: list[tuple[int, NDArray[np.float64]]] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            sep = "\t" if "\t" in line else ","
            fields = [f.strip() for f in line.split(sep)]
            values = []
            for col, tok in enumerate(fields):
                if tok.lower() in _NA_TOKENS:
                    raise DataError(f"{path}:{lineno}: NA token in column {col}")
                try:
                    values.append(float(tok))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: unparseable value {tok!r} in column {col}"
                    ) from None
            if len(values) < 2:
                raise DataError(f"{path}:{lineno}: need a label and at least one value")
            label_f = values[0]
            if label_f != int(label_f):
                raise DataError(f"{path}:{lineno}: non-integer label {label_f}")
            rows.append((int(label_f), np.asarray(values[1:], dtype=np.float64)))
    if not rows:
        raise DataError(f"{path}: no series found")
    originals = sorted({lab for lab, _ in rows})
    mapping = {orig: i for i, orig in enumerate(originals)}
    return [LabeledSeries(mapping[lab], vals) for lab, vals in rows], mapping


@dataclass(frozen=True)
class MinMaxTransform:
    """Affine map sending the observed ``[lo, hi]`` onto ``[-1, 1]``."""

    lo: float
    hi: float

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo) * 2.0 - 1.0

    def invert(self, y):
        return (np.asarray(y, dtype=np.float64) + 1.0) / 2.0 * (self.hi - self.lo) + self.lo


def normalize(series_set: Sequence[NDArray[np.float64]]) -> tuple[list[NDArray[np.float64]], MinMaxTransform]:
    """Min-max scale a set of series jointly onto ``[-1, 1]``.

    The min and max are global over every value of every series; the affine
    transform is returned so held-out data can be mapped the same way and
    outputs mapped back.
    """
    if len(series_set) == 0:
        raise ValueError("empty series set")
    arrays = [np.asarray(s, dtype=np.float64) for s in series_set]
    lo = min(float(a.min()) for a in arrays)
    hi = max(float(a.max()) for a in arrays)
    if not hi > lo:
        raise ValueError(f"degenerate value range [{lo}, {hi}]: cannot normalize")
    t = MinMaxTransform(lo, hi)
    return [t.apply(a) for a in arrays], t


def gaussian(rng: np.random.Generator, n: int) -> NDArray[np.float64]:
    """n iid standard normals via the fixed inverse-CDF method (AS241).

    Uniforms are drawn as integers in ``[1, 2^53)`` so neither tail value 0
    nor 1 can occur.
    """
    u = rng.integers(1, 1 << 53, size=n) * (2.0 ** -53)
    return np.asarray([_NORM.inv_cdf(x) for x in u], dtype=np.float64)


def gen_harmonic(
    a: float, b: float, c: float, length: int, dt: float = 0.05
) -> NDArray[np.float64]:
    """Deterministic modulated harmonic::

        s_k = a*sin(2*pi*k*dt) * cos(2*pi*b*k*dt + c*k*dt) + sin(2*pi + k*dt)
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    k = np.arange(length, dtype=np.float64)
    t = k * dt
    return a * np.sin(2 * math.pi * t) * np.cos(2 * math.pi * b * t + c * t) + np.sin(
        2 * math.pi + t
    )


def _simulate_ar(
    phi: float,
    theta: float,
    sphi: float,
    period: int,
    noise_sd: float,
    length: int,
    seed: int,
    burn_mult: int = 10,
) -> NDArray[np.float64]:
    """Shared recursion for the AR-family generators, with burn-in discarded."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0, got {noise_sd}")
    burn = burn_mult * period
    total = length + burn
    rng = spawn(seed, TAG_GENERATOR)
    eps = gaussian(rng, total) * noise_sd
    s = np.zeros(total, dtype=np.float64)
    for t in range(total):
        v = eps[t]
        if t >= 1:
            v += phi * s[t - 1] + theta * eps[t - 1]
        if sphi != 0.0 and t >= period:
            v += sphi * s[t - period]
        s[t] = v
    return s[burn:]


def _check_stationary(name: str, value: float) -> None:
    if not abs(value) < 1.0:
        raise ValueError(f"|{name}| must be < 1 for stationarity, got {value}")


def gen_ar1(phi: float, noise_sd: float, length: int, seed: int) -> NDArray[np.float64]:
    """AR(1): ``s_t = phi*s_{t-1} + eps_t``; |phi| < 1 enforced."""
    _check_stationary("phi", phi)
    return _simulate_ar(phi, 0.0, 0.0, 1, noise_sd, length, seed)


def gen_arma11(
    phi: float, theta: float, noise_sd: float, length: int, seed: int
) -> NDArray[np.float64]:
    """ARMA(1,1): ``s_t = phi*s_{t-1} + theta*eps_{t-1} + eps_t``."""
    _check_stationary("phi", phi)
    return _simulate_ar(phi, theta, 0.0, 1, noise_sd, length, seed)


def gen_sar1(
    phi: float,
    seasonal_phi: float,
    noise_sd: float,
    length: int,
    seed: int,
    period: int = 12,
) -> NDArray[np.float64]:
    """Seasonal AR: ``s_t = phi*s_{t-1} + seasonal_phi*s_{t-period} + eps_t``.

    Burn-in is ``10 * period`` samples.
    """
    _check_stationary("phi", phi)
    _check_stationary("seasonal_phi", seasonal_phi)
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    return _simulate_ar(phi, 0.0, seasonal_phi, period, noise_sd, length, seed)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one synthetic series family.

    ``kind`` is one of ``harmonic``, ``ar1``, ``arma11``, ``sar1``.  For
    ``harmonic``, ``params`` is ``(a, b, c)`` — or empty, meaning "draw
    a, b, c uniform over [0, 1] from the seed".  For the AR family it is the
    coefficient tuple ``(phi,)`` / ``(phi, theta)`` / ``(phi, seasonal_phi)``.
    """

    kind: str
    params: tuple[float, ...] = ()
    noise_sd: float = 0.1
    length: int = 220
    period: int = 12
    dt: float = 0.05

    _ARITY = {"harmonic": 3, "ar1": 1, "arma11": 2, "sar1": 2}

    def __post_init__(self):
        if self.kind not in self._ARITY:
            raise ValueError(
                f"unknown generator kind {self.kind!r}; choose from {sorted(self._ARITY)}"
            )
        n = self._ARITY[self.kind]
        if self.params and len(self.params) != n:
            raise ValueError(
                f"{self.kind} takes {n} coefficient(s), got {len(self.params)}"
            )
        if not self.params and self.kind != "harmonic":
            raise ValueError(f"{self.kind} requires explicit coefficients")


def make_series(spec: GeneratorSpec, length: int, seed: int) -> NDArray[np.float64]:
    """Simulate one series of ``length`` values from ``spec``.

    For stochastic kinds the innovations come from the generator stream of
    ``seed``; a seedless harmonic draws its (a, b, c) from the same stream.
    """
    if spec.kind == "harmonic":
        if spec.params:
            a, b, c = spec.params
        else:
            a, b, c = spawn(seed, TAG_GENERATOR).uniform(0.0, 1.0, 3)
        return gen_harmonic(a, b, c, length, dt=spec.dt)
    if spec.kind == "ar1":
        return gen_ar1(spec.params[0], spec.noise_sd, length, seed)
    if spec.kind == "arma11":
        return gen_arma11(spec.params[0], spec.params[1], spec.noise_sd, length, seed)
    return gen_sar1(
        spec.params[0], spec.params[1], spec.noise_sd, length, seed, period=spec.period
    )


def save_series_csv(path: str | Path, values: Sequence[float]) -> None:
    """Write a two-column (index, value) CSV with a header row."""
    arr = np.asarray(values, dtype=np.float64)
    with Path(path).open("w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(arr):
            fh.write(f"{i},{v!r}\n")


def load_series_csv(path: str | Path) -> NDArray[np.float64]:
    """Read a series saved by :func:`save_series_csv` (header optional;
    single-column files are accepted too)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"series file not found: {path}")
    values = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            tok = fields[-1].strip()
            if lineno == 1 and not _is_float(tok):
                continue  # header
            if not _is_float(tok):
                raise DataError(f"{path}:{lineno}: unparseable value {tok!r}")
            values.append(float(tok))
    if not values:
        raise DataError(f"{path}: no values found")
    return np.asarray(values, dtype=np.float64)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False
