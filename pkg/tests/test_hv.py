"""Binary hypervector algebra: worked examples, properties, statistics."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvtm.hv import Hypervector, bind, bundle, hamming, permute, random_hv
from hvtm.rng import TAG_ITEM_MEMORY, spawn

D = 5000


def _rng(seed: int) -> np.random.Generator:
    return spawn(seed, TAG_ITEM_MEMORY)


def _bools(dim: int, rng: np.random.Generator) -> list[int]:
    return [int(b) for b in rng.integers(0, 2, dim)]


# -- worked examples --------------------------------------------------------


def test_bind_worked_example():
    a = Hypervector.from_bools([1, 0, 1, 1])
    b = Hypervector.from_bools([0, 1, 0, 1])
    assert bind(a, b).to_bools().tolist() == [1, 1, 1, 0]


def test_bind_self_is_zero():
    a = Hypervector.from_bools([1, 0, 1, 1])
    assert bind(a, a) == Hypervector.zeros(4)
    assert bind(a, a).popcount() == 0


def test_bind_self_inverse():
    rng = _rng(0)
    a = Hypervector.from_bools(_bools(97, rng))
    b = Hypervector.from_bools(_bools(97, rng))
    assert bind(bind(a, b), a) == b
    assert bind(bind(a, b), b) == a


def test_majority_worked_example():
    vs = [
        Hypervector.from_bools([1, 1, 0, 0]),
        Hypervector.from_bools([1, 0, 1, 0]),
        Hypervector.from_bools([1, 0, 0, 1]),
    ]
    assert bundle(vs).to_bools().tolist() == [1, 0, 0, 0]


def test_bundle_single_identity():
    a = Hypervector.from_bools([1, 0, 1, 1, 0, 1, 0, 0, 1])
    assert bundle([a]) == a


def test_bundle_even_needs_tie_vector():
    rng = _rng(1)
    vs = [Hypervector.from_bools(_bools(16, rng)) for _ in range(2)]
    with pytest.raises(ValueError):
        bundle(vs)
    tie = Hypervector.from_bools(_bools(16, rng))
    out = bundle(vs, tie=tie)
    # Where the two disagree the tie vector decides; where they agree it must
    # not interfere.
    a, b, t, o = (v.to_bools() for v in (*vs, tie, out))
    for i in range(16):
        expect = a[i] if a[i] == b[i] else t[i]
        assert o[i] == expect


def test_permute_worked_examples():
    v = Hypervector.from_bools([1, 0, 0, 0])
    assert permute(v, 1).to_bools().tolist() == [0, 1, 0, 0]
    assert permute(v, 0) == v
    assert permute(v, 4) == v


def test_permute_composes_and_preserves_popcount():
    rng = _rng(2)
    v = Hypervector.from_bools(_bools(75, rng))
    assert permute(permute(v, 13), 29) == permute(v, 42)
    assert permute(v, 31).popcount() == v.popcount()


def test_hamming_worked_examples():
    a = Hypervector.from_bools([1, 0, 1, 1])
    b = Hypervector.from_bools([0, 1, 0, 1])
    assert hamming(a, b) == 3
    assert hamming(a, a) == 0
    assert hamming(b, a) == 3


def test_dim_mismatch_rejected():
    a = Hypervector.from_bools([1, 0, 1])
    b = Hypervector.from_bools([1, 0, 1, 1])
    for op in (bind, hamming):
        with pytest.raises(ValueError):
            op(a, b)
    with pytest.raises(ValueError):
        bundle([a, b, a])


def test_bundle_empty_rejected():
    with pytest.raises(ValueError):
        bundle([])


def test_random_hv_determinism_and_divergence():
    a = random_hv(_rng(7), 64)
    b = random_hv(_rng(7), 64)
    c = random_hv(_rng(8), 64)
    assert a == b
    assert a != c


def test_random_hv_tiny_dim_rejected():
    with pytest.raises(ValueError):
        random_hv(_rng(0), 4)


# -- container behaviour ----------------------------------------------------


def test_round_trip_bools_and_indexing():
    bits = [1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1]
    v = Hypervector.from_bools(bits)
    assert len(v) == 11
    assert v.to_bools().tolist() == bits
    assert [v[i] for i in range(11)] == bits
    with pytest.raises(IndexError):
        v[11]


def test_wire_format_round_trip():
    rng = _rng(3)
    for dim in (8, 11, 64, 100, 5000):
        v = Hypervector.from_bools(_bools(dim, rng))
        blob = v.to_bytes() + b"trailing"
        w, offset = Hypervector.from_bytes(blob)
        assert w == v
        assert blob[offset:] == b"trailing"


def test_hash_eq_consistency():
    a = Hypervector.from_bools([1, 0, 1, 1])
    b = Hypervector.from_bools([1, 0, 1, 1])
    assert a == b and hash(a) == hash(b)
    assert a != Hypervector.from_bools([1, 0, 1, 0])
    assert a != "not a hypervector"


def test_immutability():
    v = Hypervector.from_bools([1, 0, 1, 1])
    with pytest.raises(AttributeError):
        v.dim = 9


# -- hypothesis property tests at small dims --------------------------------

bool_lists = st.lists(st.integers(0, 1), min_size=1, max_size=90)


@settings(max_examples=60, deadline=None)
@given(bool_lists, bool_lists)
def test_prop_bind_self_inverse(xs, ys):
    if len(xs) != len(ys):
        ys = (ys * (len(xs) // max(len(ys), 1) + 1))[: len(xs)]
    a, b = Hypervector.from_bools(xs), Hypervector.from_bools(ys)
    assert bind(bind(a, b), b) == a
    assert bind(a, b) == bind(b, a)


@settings(max_examples=60, deadline=None)
@given(bool_lists, st.integers(-200, 200))
def test_prop_permute_round_trip(xs, j):
    v = Hypervector.from_bools(xs)
    assert permute(permute(v, j), -j) == v
    assert permute(v, j).popcount() == v.popcount()
    # explicit rotation semantics: bit i lands at (i + j) mod dim
    shifted = permute(v, j).to_bools()
    for i, bit in enumerate(xs):
        assert shifted[(i + j) % len(xs)] == bit


@settings(max_examples=60, deadline=None)
@given(st.lists(bool_lists, min_size=1, max_size=9), st.data())
def test_prop_bundle_matches_counting_oracle(rows, data):
    dim = len(rows[0])
    rows = [(r * (dim // max(len(r), 1) + 1))[:dim] for r in rows]
    mat = np.array(rows, dtype=np.int64)
    vs = [Hypervector.from_bools(r) for r in rows]
    if len(rows) % 2 == 0:
        tie_bits = data.draw(st.lists(st.integers(0, 1), min_size=dim, max_size=dim))
        tie = Hypervector.from_bools(tie_bits)
        counts = 2 * mat.sum(axis=0) + np.array(tie_bits)
        expect = (counts > len(rows)).astype(np.uint8)
        got = bundle(vs, tie=tie)
    else:
        expect = (2 * mat.sum(axis=0) > len(rows)).astype(np.uint8)
        got = bundle(vs)
    assert got.to_bools().tolist() == expect.tolist()


@settings(max_examples=40, deadline=None)
@given(bool_lists, bool_lists, bool_lists)
def test_prop_hamming_metric_axioms(xs, ys, zs):
    dim = len(xs)
    ys = (ys * (dim // max(len(ys), 1) + 1))[:dim]
    zs = (zs * (dim // max(len(zs), 1) + 1))[:dim]
    a, b, c = (Hypervector.from_bools(v) for v in (xs, ys, zs))
    assert hamming(a, b) == hamming(b, a)
    assert hamming(a, b) == 0 if a == b else hamming(a, b) > 0
    assert hamming(a, c) <= hamming(a, b) + hamming(b, c)


# -- statistical bands (5-sigma binomial oracles, fixed seeds) --------------


def test_random_pair_distance_band():
    rng = _rng(11)
    for _ in range(50):
        a, b = random_hv(rng, D), random_hv(rng, D)
        assert 2323 <= hamming(a, b) <= 2677  # 2500 +- 5*sqrt(D/4)


def test_random_popcount_band():
    rng = _rng(12)
    for _ in range(50):
        assert 2150 <= random_hv(rng, D).popcount() <= 2850


def test_bundle_three_distance_band():
    # Per-bit agreement with any one input is 3/4, so d_H ~ Binomial(D, 1/4).
    rng = _rng(13)
    for _ in range(40):
        vs = [random_hv(rng, D) for _ in range(3)]
        out = bundle(vs)
        for v in vs:
            assert 1095 <= hamming(out, v) <= 1405  # 1250 +- 5*sqrt(3D/16)


def test_tail_bits_stay_clean():
    # Operations on dims that do not fill the last byte must not leak bits
    # into the padding, which would corrupt popcounts and distances.
    rng = _rng(14)
    for dim in (9, 13, 50, 127):
        a = random_hv(rng, dim)
        b = random_hv(rng, dim)
        for v in (bind(a, b), permute(a, 3), bundle([a, b, bind(a, b)])):
            assert v.popcount() == int(v.to_bools().sum())
            assert hamming(v, v) == 0
            w, _ = Hypervector.from_bytes(v.to_bytes())
            assert w == v
