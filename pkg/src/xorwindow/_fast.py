"""numba kernels for the Monte Carlo hot path.

Everything here mirrors a documented contract elsewhere in the package:
the RNG reproduces :mod:`xorwindow.rng` bit for bit, instance generation
matches :func:`xorwindow.instance.generate`, and the GF(2) elimination is
the dense bitset algorithm described in :mod:`xorwindow.gf2` (pivot on the
lowest-index nonzero column, first matching row).  All kernels release the
GIL so trial-level thread pools get real parallelism.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_ONE = U64(1)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def _xo_init(seed):
    st = np.empty(4, dtype=np.uint64)
    s = U64(seed)
    for i in range(4):
        s = s + _GOLDEN
        st[i] = _mix64(s)
    if st[0] == U64(0) and st[1] == U64(0) and st[2] == U64(0) and st[3] == U64(0):
        st[0] = _GOLDEN
    return st


@njit(cache=True, nogil=True, inline="always")
def _rotl(x, k):
    return (x << U64(k)) | (x >> U64(64 - k))


@njit(cache=True, nogil=True, inline="always")
def _xo_next(st):
    result = _rotl(st[0] + st[3], 23) + st[0]
    t = st[1] << U64(17)
    st[2] ^= st[0]
    st[3] ^= st[1]
    st[1] ^= st[2]
    st[0] ^= st[3]
    st[2] ^= t
    st[3] = _rotl(st[3], 45)
    return result


@njit(cache=True, nogil=True, inline="always")
def _xo_below(st, n):
    # Uniform int64 in [0, n); bitmask rejection, identical to rng.Xoshiro256PP.
    if n <= 1:
        return 0
    x = U64(n - 1)
    mask = U64(0)
    while x > U64(0):
        mask = (mask << _ONE) | _ONE
        x >>= _ONE
    un = U64(n)
    while True:
        v = _xo_next(st) & mask
        if v < un:
            return np.int64(v)


@njit(cache=True, nogil=True)
def fill_instance(k, m, n, seed):
    """k*n uniform variable slots in [0, m) plus n fair rhs bits."""
    slots = np.empty(n * k, dtype=np.int64)
    rhs = np.empty(n, dtype=np.uint8)
    st = _xo_init(seed)
    idx = 0
    for e in range(n):
        for _ in range(k):
            slots[idx] = _xo_below(st, m)
            idx += 1
        rhs[e] = np.uint8(_xo_next(st) & _ONE)
    return slots, rhs


@njit(cache=True, nogil=True)
def peel_core(k, m, n, slots, seed):
    """Peel to the 2-core, uniformly removing candidate equations.

    A candidate equation contains at least one variable whose total degree
    (slot occurrences over remaining equations, multiplicity counted) is
    exactly 1.  Returns (tau_c, z1_trace, z2_trace, active, m_core) where
    the traces hold z before each removal plus the stopped state.
    """
    deg = np.zeros(m, dtype=np.int64)
    for i in range(n * k):
        deg[slots[i]] += 1

    # CSR incidence: variable -> equation ids, one entry per slot.
    off = np.zeros(m + 1, dtype=np.int64)
    for i in range(n * k):
        off[slots[i] + 1] += 1
    for v in range(m):
        off[v + 1] += off[v]
    inc = np.empty(n * k, dtype=np.int64)
    cur = off[:m].copy()
    for i in range(n * k):
        v = slots[i]
        inc[cur[v]] = i // k
        cur[v] += 1

    z1 = 0
    z2 = 0
    for v in range(m):
        if deg[v] == 1:
            z1 += 1
        elif deg[v] >= 2:
            z2 += 1

    cnt1 = np.zeros(n, dtype=np.int64)  # slots of e holding a degree-1 variable
    for i in range(n * k):
        if deg[slots[i]] == 1:
            cnt1[i // k] += 1

    active = np.ones(n, dtype=np.bool_)
    cand = np.empty(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    nc = 0
    for e in range(n):
        if cnt1[e] > 0:
            cand[nc] = e
            pos[e] = nc
            nc += 1

    z1_tr = np.empty(n + 1, dtype=np.int64)
    z2_tr = np.empty(n + 1, dtype=np.int64)
    st = _xo_init(seed)
    tau = 0
    while nc > 0:
        z1_tr[tau] = z1
        z2_tr[tau] = z2
        j = _xo_below(st, nc)
        e = cand[j]
        last = cand[nc - 1]
        cand[j] = last
        pos[last] = j
        nc -= 1
        pos[e] = -1
        active[e] = False

        base = e * k
        for s in range(base, base + k):
            v = slots[s]
            d = deg[v]
            deg[v] = d - 1
            if d == 1:
                z1 -= 1
            elif d == 2:
                z2 -= 1
                z1 += 1
        # Variables that just dropped to degree 1 make their surviving
        # equation a candidate.  Skip repeats of v within e: the first
        # occurrence already sees the final degree.
        for s in range(base, base + k):
            v = slots[s]
            if deg[v] != 1:
                continue
            dup = False
            for s2 in range(base, s):
                if slots[s2] == v:
                    dup = True
                    break
            if dup:
                continue
            for p in range(off[v], off[v + 1]):
                e2 = inc[p]
                if active[e2]:
                    cnt1[e2] += 1
                    if cnt1[e2] == 1:
                        cand[nc] = e2
                        pos[e2] = nc
                        nc += 1
                    break
        tau += 1

    z1_tr[tau] = z1
    z2_tr[tau] = z2
    m_core = z2  # z1 == 0 at the stopping time
    return tau, z1_tr[: tau + 1], z2_tr[: tau + 1], active, m_core


@njit(cache=True, nogil=True)
def build_rows(slots, rhs, sel, k, m):
    """Pack selected equations into bitset rows; column m is the rhs."""
    nr = sel.size
    nw = (m + 64) >> 6
    rows = np.zeros((nr, nw), dtype=np.uint64)
    for i in range(nr):
        base = sel[i] * k
        for s in range(base, base + k):
            v = slots[s]
            rows[i, v >> 6] ^= _ONE << U64(v & 63)
        if rhs[sel[i]] != 0:
            rows[i, m >> 6] ^= _ONE << U64(m & 63)
    return rows


@njit(cache=True, nogil=True)
def gf2_forward(rows, m, pivcols):
    """In-place forward elimination; returns (rank_A, rank_Ab).

    Pivot rule: lowest-index nonzero column, first row at or below the
    boundary.  Rows below the boundary are zero in all processed columns,
    so swaps and XORs start at the pivot's word.
    """
    nrows = rows.shape[0]
    nw = rows.shape[1]
    rank = 0
    for c in range(m):
        if rank == nrows:
            break
        wc = c >> 6
        bc = _ONE << U64(c & 63)
        piv = -1
        for r in range(rank, nrows):
            if rows[r, wc] & bc:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for w in range(wc, nw):
                t = rows[rank, w]
                rows[rank, w] = rows[piv, w]
                rows[piv, w] = t
        for r in range(piv + 1, nrows):
            if rows[r, wc] & bc:
                for w in range(wc, nw):
                    rows[r, w] ^= rows[rank, w]
        pivcols[rank] = c
        rank += 1
    rw = m >> 6
    rb = _ONE << U64(m & 63)
    rank_ab = rank
    for r in range(rank, nrows):
        if rows[r, rw] & rb:
            rank_ab = rank + 1
            break
    return rank, rank_ab


@njit(cache=True, nogil=True, inline="always")
def _popcount(x):
    x = x - ((x >> _ONE) & U64(0x5555555555555555))
    x = (x & U64(0x3333333333333333)) + ((x >> U64(2)) & U64(0x3333333333333333))
    x = (x + (x >> U64(4))) & U64(0x0F0F0F0F0F0F0F0F)
    return (x * U64(0x0101010101010101)) >> U64(56)


@njit(cache=True, nogil=True)
def gf2_witness(rows, rank, m, pivcols):
    """Back-substitute after gf2_forward; free variables are set to 0."""
    nw = rows.shape[1]
    xw = np.zeros(nw, dtype=np.uint64)  # packed assignment, rhs bit never set
    x = np.zeros(m, dtype=np.uint8)
    rw = m >> 6
    rb = _ONE << U64(m & 63)
    for i in range(rank - 1, -1, -1):
        c = pivcols[i]
        acc = U64(0)
        for w in range(nw):
            acc ^= rows[i, w] & xw[w]
        parity = _popcount(acc) & _ONE
        if rows[i, rw] & rb:
            parity ^= _ONE
        if parity:
            x[c] = 1
            xw[c >> 6] |= _ONE << U64(c & 63)
    return x


@njit(cache=True, nogil=True)
def check_rows(rows, m, x):
    """True iff assignment x satisfies every (coeff, rhs) bitset row."""
    nrows = rows.shape[0]
    nw = rows.shape[1]
    xw = np.zeros(nw, dtype=np.uint64)
    for v in range(m):
        if x[v]:
            xw[v >> 6] |= _ONE << U64(v & 63)
    rw = m >> 6
    rb = _ONE << U64(m & 63)
    for r in range(nrows):
        acc = U64(0)
        for w in range(nw):
            acc ^= rows[r, w] & xw[w]
        parity = _popcount(acc) & _ONE
        want = _ONE if rows[r, rw] & rb else U64(0)
        if parity != want:
            return False
    return True


@njit(cache=True, nogil=True)
def scan_trial(k, m, n, gen_seed, peel_seed, exact):
    """One Monte Carlo trial: generate, peel, decide satisfiability.

    exact=True solves the core subsystem over GF(2); otherwise the
    surplus-sign proxy (sat iff m_core - n_core >= 0) is used.  Returns
    (sat, n_core, m_core).
    """
    slots, rhs = fill_instance(k, m, n, gen_seed)
    tau_c, _z1, _z2, active, m_core = peel_core(k, m, n, slots, peel_seed)
    n_core = n - tau_c
    if not exact:
        sat = 1 if m_core - n_core >= 0 else 0
        return sat, n_core, m_core
    if n_core == 0:
        return 1, n_core, m_core
    sel = np.empty(n_core, dtype=np.int64)
    j = 0
    for e in range(n):
        if active[e]:
            sel[j] = e
            j += 1
    # Compact core variables to [0, m_core) so row width tracks the core.
    remap = np.full(m, -1, dtype=np.int64)
    nv = 0
    for i in range(n_core):
        base = sel[i] * k
        for s in range(base, base + k):
            v = slots[s]
            if remap[v] < 0:
                remap[v] = nv
                nv += 1
    core_slots = np.empty(n_core * k, dtype=np.int64)
    for i in range(n_core):
        base = sel[i] * k
        for s in range(k):
            core_slots[i * k + s] = remap[slots[base + s]]
    core_rhs = np.empty(n_core, dtype=np.uint8)
    for i in range(n_core):
        core_rhs[i] = rhs[sel[i]]
    ident = np.arange(n_core, dtype=np.int64)
    rows = build_rows(core_slots, core_rhs, ident, k, nv)
    pivcols = np.empty(n_core, dtype=np.int64)
    rank_a, rank_ab = gf2_forward(rows, nv, pivcols)
    sat = 1 if rank_a == rank_ab else 0
    return sat, n_core, m_core
