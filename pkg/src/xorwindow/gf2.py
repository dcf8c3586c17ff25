"""Exact satisfiability of XOR systems via dense bitset elimination.

Rows are packed uint64 bitsets of width m+1 (column m holds the rhs).
Repeated occurrences of a variable inside one equation cancel mod 2 while
packing.  Elimination pivots on the lowest-index nonzero column taking the
first row in scan order, which makes results deterministic; satisfiability
itself is invariant under any pivot choice.

``brute_force`` is the independent test oracle: exhaustive assignment
enumeration, guarded to m <= 20.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _fast
from .instance import Instance


@dataclass
class Gf2System:
    m: int  # variable columns; column m is the rhs
    rows: np.ndarray  # shape (n_rows, n_words), uint64

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    def copy(self) -> "Gf2System":
        return Gf2System(m=self.m, rows=self.rows.copy())


@dataclass(frozen=True)
class SolveResult:
    satisfiable: bool
    rank_A: int
    rank_Ab: int
    witness: Optional[np.ndarray] = None  # length-m uint8 assignment


def from_instance(inst: Instance, subset: Optional[Iterable[int]] = None) -> Gf2System:
    """One row per selected equation, coefficients reduced mod 2."""
    if subset is None:
        sel = np.arange(inst.n, dtype=np.int64)
    else:
        sel = np.asarray(sorted(int(e) for e in set(subset)), dtype=np.int64)
        if sel.size and (sel[0] < 0 or sel[-1] >= inst.n):
            raise ValueError(f"subset indices must lie in [0, {inst.n})")
    rows = _fast.build_rows(inst.slots_flat, inst.rhs, sel, inst.k, inst.m)
    return Gf2System(m=inst.m, rows=rows)


def solve(sys: Gf2System, want_witness: bool = False) -> SolveResult:
    """Gaussian elimination over GF(2); exact ranks, witness on request."""
    work = sys.rows.copy()
    pivcols = np.empty(work.shape[0], dtype=np.int64)
    rank_a, rank_ab = _fast.gf2_forward(work, sys.m, pivcols)
    sat = rank_a == rank_ab
    witness = None
    if sat and want_witness:
        witness = _fast.gf2_witness(work, rank_a, sys.m, pivcols)
    return SolveResult(satisfiable=bool(sat), rank_A=int(rank_a), rank_Ab=int(rank_ab), witness=witness)


def check_witness(sys: Gf2System, x: np.ndarray) -> bool:
    """True iff x satisfies every row of the system."""
    x = np.ascontiguousarray(x, dtype=np.uint8)
    if x.shape != (sys.m,):
        raise ValueError(f"witness must have shape ({sys.m},)")
    return bool(_fast.check_rows(sys.rows, sys.m, x))


def brute_force(sys: Gf2System) -> bool:
    """Exhaustive 2^m satisfiability check; refuses m > 20."""
    if sys.m > 20:
        raise ValueError(f"brute_force refuses m = {sys.m} > 20")
    masks = []
    bits = []
    rhs_word = sys.m >> 6
    rhs_bit = np.uint64(1) << np.uint64(sys.m & 63)
    for r in range(sys.n_rows):
        mask = 0
        for w in range(sys.rows.shape[1]):
            mask |= int(sys.rows[r, w]) << (64 * w)
        bits.append(1 if int(sys.rows[r, rhs_word]) & int(rhs_bit) else 0)
        mask &= (1 << sys.m) - 1  # strip the rhs column
        masks.append(mask)
    for a in range(1 << sys.m):
        ok = True
        for mask, b in zip(masks, bits):
            if ((mask & a).bit_count() & 1) != b:
                ok = False
                break
        if ok:
            return True
    return False
