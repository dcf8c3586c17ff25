"""Configuration-model k-XORSAT instances.

An instance is n ordered k-tuples of variable indices (uniform draws with
replacement from [0, m)) plus one fair rhs bit per equation.  Draw order
and within-equation slot order are part of the object: the model is a
directed hypergraph and variable degrees count slot occurrences with
multiplicity, so a variable appearing twice in one equation has degree 2
even though the two occurrences cancel over GF(2).

Indices are 0-based everywhere, including the text format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from . import _fast
from .rng import MASK64, derive_seed


class ParseError(ValueError):
    """Malformed instance text; the message names the offending line."""


@dataclass(eq=False)
class Instance:
    k: int
    m: int
    n: int
    slots: np.ndarray  # shape (n, k), int64, values in [0, m)
    rhs: np.ndarray  # shape (n,), uint8, values in {0, 1}
    seed: Optional[int] = None  # provenance tag; not part of identity

    def __post_init__(self) -> None:
        self.slots = np.ascontiguousarray(self.slots, dtype=np.int64).reshape(self.n, self.k)
        self.rhs = np.ascontiguousarray(self.rhs, dtype=np.uint8).reshape(self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.k == other.k
            and self.m == other.m
            and self.n == other.n
            and np.array_equal(self.slots, other.slots)
            and np.array_equal(self.rhs, other.rhs)
        )

    def equations(self) -> Iterator[tuple[tuple[int, ...], int]]:
        for i in range(self.n):
            yield tuple(int(v) for v in self.slots[i]), int(self.rhs[i])

    @property
    def slots_flat(self) -> np.ndarray:
        return self.slots.reshape(-1)


@dataclass(frozen=True)
class DegreeTable:
    deg: np.ndarray  # length m, occurrences with multiplicity
    counts: tuple[int, int, int]  # (z0, z1, z2plus)


def m_from_r(k: int, n: int, r: float, rho_k: float) -> int:
    """Variable count on the scaling grid: floor(n*rho_k + r*sqrt(n))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rho_k <= 0:
        raise ValueError(f"rho_k must be positive, got {rho_k}")
    m = math.floor(n * rho_k + r * math.sqrt(n))
    if m < 0:
        raise ValueError(f"r={r} is too negative for n={n}: m would be {m}")
    return m


def generate(k: int, m: int, n: int, seed: int) -> Instance:
    """Draw an instance; identical (k, m, n, seed) reproduces it bit for bit."""
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    if n < 0 or m < 0:
        raise ValueError("m and n must be nonnegative")
    if m == 0 and n > 0:
        raise ValueError("m = 0 requires n = 0")
    slots, rhs = _fast.fill_instance(k, m, n, np.uint64(seed & MASK64))
    return Instance(k=k, m=m, n=n, slots=slots.reshape(n, k), rhs=rhs, seed=seed)


def trial_seeds(master_seed: int, trial: int) -> tuple[int, int]:
    """(generation seed, peeling seed) for one trial under a master seed."""
    t = derive_seed(master_seed, trial)
    return derive_seed(t, 1), derive_seed(t, 2)


def degrees(inst: Instance, removed: Iterable[int] = ()) -> DegreeTable:
    """Degree table over the equations not in ``removed`` (multiplicity counted)."""
    removed = frozenset(int(e) for e in removed)
    if removed:
        for e in removed:
            if not 0 <= e < inst.n:
                raise ValueError(f"removed equation index {e} out of range [0, {inst.n})")
        keep = np.ones(inst.n, dtype=bool)
        keep[list(removed)] = False
        slots = inst.slots[keep].reshape(-1)
    else:
        slots = inst.slots_flat
    deg = np.bincount(slots, minlength=inst.m).astype(np.int64) if inst.m else np.zeros(0, np.int64)
    z1 = int(np.count_nonzero(deg == 1))
    z2plus = int(np.count_nonzero(deg >= 2))
    z0 = inst.m - z1 - z2plus
    return DegreeTable(deg=deg, counts=(z0, z1, z2plus))


def encode(inst: Instance) -> str:
    """Canonical text form, format v1: "k m n" header then one equation per line."""
    lines = [f"{inst.k} {inst.m} {inst.n}"]
    for eq, b in inst.equations():
        lines.append(" ".join(str(v) for v in eq) + f" {b}")
    return "\n".join(lines) + "\n"


def decode(text: str) -> Instance:
    """Parse format v1; inverse of :func:`encode` (seed tag excepted)."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline is canonical but not required
    if not lines:
        raise ParseError("line 1: empty input")
    header = lines[0].split()
    if len(header) != 3:
        raise ParseError(f'line 1: expected "k m n", got {lines[0]!r}')
    try:
        k, m, n = (int(tok) for tok in header)
    except ValueError:
        raise ParseError(f"line 1: non-integer header field in {lines[0]!r}") from None
    if k < 3 or m < 0 or n < 0:
        raise ParseError(f"line 1: invalid dimensions k={k} m={m} n={n}")
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} equation lines, found {len(lines) - 1}")
    slots = np.empty((n, k), dtype=np.int64)
    rhs = np.empty(n, dtype=np.uint8)
    for i in range(n):
        lineno = i + 2
        toks = lines[i + 1].split()
        if len(toks) != k + 1:
            raise ParseError(f"line {lineno}: expected {k} indices and a bit, got {len(toks)} fields")
        try:
            vals = [int(tok) for tok in toks]
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field") from None
        for v in vals[:k]:
            if not 0 <= v < m:
                raise ParseError(f"line {lineno}: variable index {v} out of range [0, {m})")
        if vals[k] not in (0, 1):
            raise ParseError(f"line {lineno}: rhs bit must be 0 or 1, got {vals[k]}")
        slots[i] = vals[:k]
        rhs[i] = vals[k]
    return Instance(k=k, m=m, n=n, slots=slots, rhs=rhs, seed=None)
