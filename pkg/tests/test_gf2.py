"""GF(2) system building, elimination, brute-force oracle agreement."""

import numpy as np
import pytest

from xorwindow.gf2 import Gf2System, brute_force, check_witness, from_instance, solve
from xorwindow.instance import generate
from xorwindow.peel import core_of
from tests.test_instance import make_instance


def row_bits(sys_: Gf2System, r: int) -> tuple[int, int]:
    """(coefficient mask, rhs bit) of one row, for readable asserts."""
    mask = 0
    for w in range(sys_.rows.shape[1]):
        mask |= int(sys_.rows[r, w]) << (64 * w)
    rhs = (mask >> sys_.m) & 1
    return mask & ((1 << sys_.m) - 1), rhs


class TestFromInstance:
    def test_mod2_cancellation(self):
        sys_ = from_instance(make_instance(3, 2, [((0, 0, 1), 1)]))
        assert row_bits(sys_, 0) == (0b10, 1)  # only x1 survives

    def test_triple_occurrence(self):
        sys_ = from_instance(make_instance(3, 1, [((0, 0, 0), 1)]))
        assert row_bits(sys_, 0) == (0b1, 1)

    def test_empty_subset(self):
        inst = generate(3, 5, 4, seed=0)
        sys_ = from_instance(inst, subset=())
        assert sys_.n_rows == 0

    def test_subset_out_of_range(self):
        inst = generate(3, 5, 4, seed=0)
        with pytest.raises(ValueError):
            from_instance(inst, subset={4})


class TestSolve:
    def test_inconsistent_pair(self):
        inst = make_instance(3, 3, [((0, 1, 2), 0), ((0, 1, 2), 1)])
        res = solve(from_instance(inst))
        assert not res.satisfiable
        assert (res.rank_A, res.rank_Ab) == (1, 2)

    def test_duplicate_rows_sat(self):
        inst = make_instance(3, 3, [((0, 1, 2), 0), ((0, 1, 2), 0)])
        res = solve(from_instance(inst), want_witness=True)
        assert res.satisfiable
        assert res.witness.tolist() == [0, 0, 0]  # all-zero assignment works
        assert check_witness(from_instance(inst), res.witness)

    def test_empty_system(self):
        res = solve(from_instance(make_instance(3, 4, [])))
        assert res.satisfiable and res.rank_A == 0 == res.rank_Ab

    def test_against_brute_force(self):
        # exhaustive 2^m enumeration is the oracle
        rng = np.random.default_rng(101)
        checked_sat = checked_unsat = 0
        for _ in range(1000):
            m = int(rng.integers(1, 13))
            n = int(rng.integers(0, 16))
            inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
            sys_ = from_instance(inst)
            res = solve(sys_, want_witness=True)
            assert res.satisfiable == brute_force(sys_)
            assert res.satisfiable == (res.rank_A == res.rank_Ab)
            if res.satisfiable:
                assert check_witness(sys_, res.witness)
                checked_sat += 1
            else:
                assert res.witness is None
                checked_unsat += 1
        assert checked_sat > 100 and checked_unsat > 100

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(55)
        for _ in range(20):
            inst = generate(3, 10, 14, seed=int(rng.integers(0, 2**63)))
            base = solve(from_instance(inst)).satisfiable
            for _ in range(5):
                perm = rng.permutation(inst.n)
                shuffled = make_instance(
                    3, inst.m, [(tuple(inst.slots[i]), int(inst.rhs[i])) for i in perm]
                )
                assert solve(from_instance(shuffled)).satisfiable == base

    def test_solve_does_not_mutate(self):
        inst = generate(3, 8, 10, seed=3)
        sys_ = from_instance(inst)
        before = sys_.rows.copy()
        solve(sys_, want_witness=True)
        assert np.array_equal(sys_.rows, before)


class TestBruteForce:
    def test_empty_true(self):
        assert brute_force(from_instance(make_instance(3, 3, [])))

    def test_contradiction(self):
        inst = make_instance(3, 1, [((0, 0, 0), 0), ((0, 0, 0), 1)])
        assert not brute_force(from_instance(inst))

    def test_guard(self):
        inst = generate(3, 21, 2, seed=0)
        with pytest.raises(ValueError):
            brute_force(from_instance(inst))


def test_core_subsystem_equivalence():
    # peeled equations are always completable, so sat(instance) == sat(core);
    # brute force adjudicates both sides
    rng = np.random.default_rng(77)
    mismatched_cores = 0
    for _ in range(1000):
        m = int(rng.integers(1, 13))
        n = int(rng.integers(0, 16))
        inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
        full_sys = from_instance(inst)
        full = brute_force(full_sys)
        core = core_of(inst)
        core_sys = from_instance(inst, subset=core.core_eq_indices)
        assert brute_force(core_sys) == full
        assert solve(core_sys).satisfiable == full
        if core.n_core != inst.n:
            mismatched_cores += 1
    assert mismatched_cores > 200  # peeling actually did something
