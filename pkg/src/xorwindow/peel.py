"""Peeling to the 2-core and the (z1, z2) Markov trajectory.

Each step removes an equation chosen uniformly among those containing at
least one degree-1 variable (degree = slot occurrences with multiplicity,
so a variable whose two occurrences sit in one equation does not make it
peelable).  The process stops at the 2-core, which is unique regardless of
removal order.  z1/z2 count variables of degree exactly 1 and at least 2.

``sample_kernel`` draws one step of the approximating kernel: with
(q0-1, q1, q2) multinomial on k-1 slots and probabilities from
:func:`xorwindow.theory.kernel_probs`, the increment is (q1 - q0, -q1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast
from .instance import Instance
from .rng import MASK64
from .theory import StatePoint, kernel_probs


@dataclass(frozen=True)
class PeelTrace:
    tau: np.ndarray  # recorded step indices, ending at tau_c
    z1: np.ndarray
    z2: np.ndarray
    tau_c: int


@dataclass(frozen=True)
class CoreResult:
    core_eq_indices: np.ndarray  # sorted surviving equation indices
    n_core: int
    m_core: int

    @property
    def surplus(self) -> int:
        return self.m_core - self.n_core


def peel_run(inst: Instance, seed: int, stride: int = 1) -> tuple[PeelTrace, CoreResult]:
    """Peel one instance; the trace records z before each removal and at stop.

    stride > 1 downsamples the recorded steps (the stopped state is always
    kept); the removal sequence itself is unaffected.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    tau_c, z1_tr, z2_tr, active, m_core = _fast.peel_core(
        inst.k, inst.m, inst.n, inst.slots_flat, np.uint64(seed & MASK64)
    )
    tau_c = int(tau_c)
    if stride == 1:
        taus = np.arange(tau_c + 1, dtype=np.int64)
        z1, z2 = z1_tr, z2_tr
    else:
        keep = np.arange(0, tau_c + 1, stride, dtype=np.int64)
        if keep[-1] != tau_c:
            keep = np.append(keep, tau_c)
        taus, z1, z2 = keep, z1_tr[keep], z2_tr[keep]
    trace = PeelTrace(tau=taus, z1=z1, z2=z2, tau_c=tau_c)
    core = CoreResult(
        core_eq_indices=np.nonzero(active)[0].astype(np.int64),
        n_core=inst.n - tau_c,
        m_core=int(m_core),
    )
    return trace, core


def core_of(inst: Instance) -> CoreResult:
    """The 2-core; identical for every removal order, so the seed is fixed."""
    _, core = peel_run(inst, seed=0)
    return core


def sample_kernel(state: StatePoint, k: int, rng: np.random.Generator, size: int | None = None):
    """Draw increments (dz1, dz2) of the approximate transition kernel.

    Returns an int64 pair, or an array of shape (size, 2) when size is
    given (one multinomial batch; much faster than repeated calls).
    """
    probs = kernel_probs(state, k)
    p = [probs.p0, probs.p1, probs.p2]
    if size is None:
        c0, q1, _q2 = rng.multinomial(k - 1, p)
        return np.array([q1 - (1 + c0), -q1], dtype=np.int64)
    counts = rng.multinomial(k - 1, p, size=size)
    out = np.empty((size, 2), dtype=np.int64)
    out[:, 0] = counts[:, 1] - 1 - counts[:, 0]
    out[:, 1] = -counts[:, 1]
    return out
