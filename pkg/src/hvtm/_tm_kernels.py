"""JIT kernels for the coalesced Tsetlin machine.

Hot-path representation
-----------------------
Literals are packed into 64-bit words: first the positive half (one bit per
input feature), then the negated half, each padded to whole words.  Automaton
states are *bit-sliced*: for every clause the 8 bits of each literal's state
byte live in 8 separate plane words, so a masked increment/decrement of many
literals at once is a ripple-carry over 8 words.  Plane 7 doubles as the
include mask (a literal is included iff its state byte ≥ 128), which is what
clause evaluation reads.

Randomness is a counter-based splitmix64 stream keyed by (stream seed, sample
counter, clause index) — reproducible regardless of compilation or call
order.  The per-literal Bernoulli(1/s) decisions are generated as geometric
gaps between hit positions, sampled exactly via a 256-bucket alias table with
a tail-escape bucket.
"""
from __future__ import annotations

import numpy as np
from numba import njit

U0 = np.uint64(0)
ONE = np.uint64(1)
GOLD = np.uint64(0x9E3779B97F4A7C15)
MX1 = np.uint64(0xBF58476D1CE4E5B9)
MX2 = np.uint64(0x94D049BB133111EB)
C_SAMPLE = np.uint64(0xD6E8FEB86659FD93)
C_CLAUSE = np.uint64(0xA3B195354A39B70D)
S8 = np.uint64(8)
S11 = np.uint64(11)
S27 = np.uint64(27)
S30 = np.uint64(30)
S31 = np.uint64(31)
INV53 = 2.0 ** -53
INV56 = 2.0 ** -56
M255 = np.uint64(255)

# SWAR popcount constants
PC1 = np.uint64(0x5555555555555555)
PC2 = np.uint64(0x3333333333333333)
PC4 = np.uint64(0x0F0F0F0F0F0F0F0F)
PCH = np.uint64(0x0101010101010101)
SH1 = np.uint64(1)
SH2 = np.uint64(2)
SH4 = np.uint64(4)
SH56 = np.uint64(56)


def build_geometric_alias(q: float) -> tuple[np.ndarray, np.ndarray]:
    """Walker alias table for the geometric gap distribution at hit rate ``q``.

    Buckets 0..254 carry ``P(gap = k) = q * (1-q)^k``; bucket 255 is the tail
    escape with mass ``(1-q)^255`` (the kernel adds 255 and redraws, which is
    exact by memorylessness).  The table is built deterministically.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"hit rate {q} outside (0, 1)")
    m = 256
    pm = np.empty(m, dtype=np.float64)
    k = np.arange(m - 1, dtype=np.float64)
    pm[: m - 1] = q * (1.0 - q) ** k
    pm[m - 1] = (1.0 - q) ** (m - 1)
    scaled = pm * m / pm.sum()
    prob = np.ones(m, dtype=np.float64)
    alias = np.arange(m, dtype=np.int64)
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] + scaled[s] - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> S30)) * MX1
    z = (z ^ (z >> S27)) * MX2
    return z ^ (z >> S31)


@njit(inline="always")
def _next_f64(state):
    state = state + GOLD
    u = _mix(state)
    return state, np.float64(u >> S11) * INV53


@njit(inline="always")
def _geo(state, prob, alias):
    """Draw one geometric gap (failures before next hit)."""
    gap = 0
    while True:
        state = state + GOLD
        u = _mix(state)
        j = np.int64(u & M255)
        f = np.float64(u >> S8) * INV56
        if f < prob[j]:
            k = j
        else:
            k = alias[j]
        gap += k
        if k < 255:
            return state, gap


@njit(inline="always")
def _popcount(x):
    x = x - ((x >> SH1) & PC1)
    x = (x & PC2) + ((x >> SH2) & PC2)
    x = (x + (x >> SH4)) & PC4
    return np.int64((x * PCH) >> SH56)


@njit(inline="always")
def _word_inc(planes, j, w, mask):
    """Add 1 to the masked state bytes of word ``w``, saturating at 255.

    Returns the bits that newly crossed into the include plane.
    """
    p7b = planes[j, 7, w]
    carry = mask
    for p in range(8):
        t = planes[j, p, w]
        planes[j, p, w] = t ^ carry
        carry = carry & t
    if carry != U0:  # wrapped 255 -> 0: pin back to 255
        for p in range(8):
            planes[j, p, w] |= carry
    return (planes[j, 7, w] ^ p7b) & planes[j, 7, w]


@njit(inline="always")
def _word_dec(planes, j, w, mask):
    """Subtract 1 from the masked state bytes of word ``w``, floor at 0.

    Returns the bits that dropped out of the include plane.
    """
    p7b = planes[j, 7, w]
    borrow = mask
    for p in range(8):
        t = planes[j, p, w]
        planes[j, p, w] = t ^ borrow
        borrow = borrow & ~t
    if borrow != U0:  # wrapped 0 -> 255: pin back to 0
        for p in range(8):
            planes[j, p, w] &= ~borrow
    return (planes[j, 7, w] ^ p7b) & p7b


@njit(inline="always")
def _apply_budget(planes, inc_count, j, newinc, max_literals):
    """Enforce the per-clause include budget after a batch of promotions.

    Crossings are admitted in ascending literal order; the rest are rolled
    back to the exclude boundary (state unchanged semantics).
    """
    total = 0
    for w in range(newinc.shape[0]):
        total += _popcount(newinc[w])
    if total == 0:
        return
    room = max_literals - inc_count[j]
    if room < 0:
        room = 0
    allowed_total = total if total < room else room
    if total <= room:
        inc_count[j] += total
        return
    for w in range(newinc.shape[0]):
        ni = newinc[w]
        if ni == U0:
            continue
        c = _popcount(ni)
        if room == 0:
            allowed = U0
        elif c <= room:
            allowed = ni
            room -= c
        else:
            allowed = U0
            rem = ni
            for _ in range(room):
                lsb = rem & (U0 - rem)
                allowed |= lsb
                rem ^= lsb
            room = 0
        blocked = ni & ~allowed
        if blocked != U0:
            _word_dec(planes, j, w, blocked)  # rollback; crossings never counted
    inc_count[j] += allowed_total


@njit(inline="always")
def _type_ia(planes, inc_count, j, lit, valid, prob, alias, max_literals, state, newinc):
    """Recognise feedback on a firing clause.

    Satisfied literals step toward include with probability (s-1)/s (their
    skip mask is the sparse one), unsatisfied literals step toward exclude
    with probability 1/s.
    """
    n_words = lit.shape[0]
    state, g = _geo(state, prob, alias)
    pos1 = g
    state, g = _geo(state, prob, alias)
    pos2 = g
    any_new = False
    for w in range(n_words):
        hi = (w + 1) << 6
        s1 = U0
        while pos1 < hi:
            s1 |= ONE << np.uint64(pos1 & 63)
            state, g = _geo(state, prob, alias)
            pos1 += 1 + g
        s2 = U0
        while pos2 < hi:
            s2 |= ONE << np.uint64(pos2 & 63)
            state, g = _geo(state, prob, alias)
            pos2 += 1 + g
        ni = U0
        m_inc = lit[w] & ~s1
        if m_inc != U0:
            ni = _word_inc(planes, j, w, m_inc)
            if ni != U0:
                any_new = True
        newinc[w] = ni
        m_dec = (~lit[w]) & s2 & valid[w]
        if m_dec != U0:
            dropped = _word_dec(planes, j, w, m_dec)
            if dropped != U0:
                inc_count[j] -= _popcount(dropped)
    if any_new:
        _apply_budget(planes, inc_count, j, newinc, max_literals)
    return state


@njit(inline="always")
def _type_ib(planes, inc_count, j, valid, prob, alias, state):
    """Erase feedback on a silent clause: every literal steps toward exclude
    with probability 1/s."""
    n_words = valid.shape[0]
    state, g = _geo(state, prob, alias)
    pos = g
    for w in range(n_words):
        hi = (w + 1) << 6
        sm = U0
        while pos < hi:
            sm |= ONE << np.uint64(pos & 63)
            state, g = _geo(state, prob, alias)
            pos += 1 + g
        m = sm & valid[w]
        if m != U0:
            dropped = _word_dec(planes, j, w, m)
            if dropped != U0:
                inc_count[j] -= _popcount(dropped)
    return state


@njit(inline="always")
def _type_ii(planes, inc_count, j, lit, valid, max_literals, newinc):
    """Reject feedback on a firing clause: promote every currently-excluded
    false literal one step toward include (probability 1)."""
    n_words = lit.shape[0]
    any_new = False
    for w in range(n_words):
        ni = U0
        m = (~lit[w]) & (~planes[j, 7, w]) & valid[w]
        if m != U0:
            ni = _word_inc(planes, j, w, m)
            if ni != U0:
                any_new = True
        newinc[w] = ni
    if any_new:
        _apply_budget(planes, inc_count, j, newinc, max_literals)


@njit(cache=True)
def clause_outputs(planes, inc_count, lit, train_mode, out):
    """Evaluate every clause on one packed-literal input.

    A clause fires iff all its included literals are satisfied; with no
    included literals it fires in train mode and stays silent in infer mode.
    """
    n_clauses = planes.shape[0]
    n_words = lit.shape[0]
    for j in range(n_clauses):
        if inc_count[j] == 0:
            out[j] = 1 if train_mode else 0
            continue
        o = np.uint8(1)
        for w in range(n_words):
            if planes[j, 7, w] & ~lit[w] != U0:
                o = np.uint8(0)
                break
        out[j] = o


@njit(cache=True)
def fit_sample(
    planes,
    inc_count,
    weights,
    lit,
    valid,
    target,
    neg,
    threshold,
    prob,
    alias,
    max_literals,
    seed,
    counter,
    out,
    newinc,
):
    """One stochastic update of the whole machine on one sample.

    Feedback probabilities come from the clipped class scores; clauses whose
    weight for the class at hand is >= 0 are treated as voting for it, the
    rest as voting against.
    """
    n_clauses = planes.shape[0]
    clause_outputs(planes, inc_count, lit, True, out)
    st = np.int64(0)
    sn = np.int64(0)
    for j in range(n_clauses):
        if out[j] == 1:
            st += weights[target, j]
            sn += weights[neg, j]
    ct = st
    if ct > threshold:
        ct = threshold
    elif ct < -threshold:
        ct = -threshold
    cn = sn
    if cn > threshold:
        cn = threshold
    elif cn < -threshold:
        cn = -threshold
    p_t = (threshold - ct) / (2.0 * threshold)
    p_n = (threshold + cn) / (2.0 * threshold)
    for j in range(n_clauses):
        state = _mix(seed ^ (counter * C_SAMPLE) ^ (np.uint64(j) * C_CLAUSE))
        state, u = _next_f64(state)
        if u < p_t:
            if weights[target, j] >= 0:
                if out[j] == 1:
                    weights[target, j] += 1
                    state = _type_ia(
                        planes, inc_count, j, lit, valid, prob, alias, max_literals, state, newinc
                    )
                else:
                    state = _type_ib(planes, inc_count, j, valid, prob, alias, state)
            else:
                if out[j] == 1:
                    weights[target, j] += 1  # toward zero
                    _type_ii(planes, inc_count, j, lit, valid, max_literals, newinc)
        state, u = _next_f64(state)
        if u < p_n:
            if weights[neg, j] >= 0:
                if out[j] == 1:
                    weights[neg, j] -= 1  # toward (and across) zero
                    _type_ii(planes, inc_count, j, lit, valid, max_literals, newinc)
            else:
                if out[j] == 1:
                    weights[neg, j] -= 1  # |w| grows
                    state = _type_ia(
                        planes, inc_count, j, lit, valid, prob, alias, max_literals, state, newinc
                    )
                else:
                    state = _type_ib(planes, inc_count, j, valid, prob, alias, state)
