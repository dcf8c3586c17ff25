"""Instance generation, degree tables, text codec."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from xorwindow.instance import (
    Instance,
    ParseError,
    decode,
    degrees,
    encode,
    generate,
    m_from_r,
    trial_seeds,
)
from xorwindow.rng import Xoshiro256PP, derive_seed


def make_instance(k, m, equations):
    slots = np.array([eq for eq, _ in equations], dtype=np.int64).reshape(len(equations), k)
    rhs = np.array([b for _, b in equations], dtype=np.uint8)
    return Instance(k=k, m=m, n=len(equations), slots=slots, rhs=rhs)


class TestMFromR:
    def test_threshold_scale(self):
        # oracle: exact rational floor of the same float inputs
        rho = 1.08940
        exact = math.floor(Fraction(10000) * Fraction(rho))
        assert exact == 10894
        assert m_from_r(3, 10000, 0.0, rho) == 10894

    def test_integer_rho(self):
        assert m_from_r(3, 100, 0.0, 1.0) == 100

    def test_positive_r(self):
        assert m_from_r(3, 100, 2.0, 1.0) == 120

    def test_exact_arithmetic_agreement(self):
        # floor(n rho + r sqrt(n)) for square n, checked with Fractions
        for n in (100, 400, 10000):
            for r in (-3.0, -1.5, 0.0, 0.5, 2.0):
                rho = 1.0894014266895655
                got = m_from_r(3, n, r, rho)
                want = math.floor(Fraction(n) * Fraction(rho) + Fraction(r) * int(math.isqrt(n)))
                assert got == want

    def test_errors(self):
        with pytest.raises(ValueError):
            m_from_r(3, 0, 0.0, 1.0)
        with pytest.raises(ValueError):
            m_from_r(3, 100, 0.0, 0.0)
        with pytest.raises(ValueError):
            m_from_r(3, 100, -200.0, 1.0)  # m would be negative


class TestGenerate:
    def test_empty_instance(self):
        inst = generate(3, 5, 0, seed=1)
        assert inst.n == 0 and inst.m == 5
        assert inst.slots.shape == (0, 3)

    def test_determinism_byte_identical(self):
        a = encode(generate(3, 50, 40, seed=123456789))
        b = encode(generate(3, 50, 40, seed=123456789))
        assert a == b
        c = encode(generate(3, 50, 40, seed=123456790))
        assert a != c

    def test_errors(self):
        with pytest.raises(ValueError):
            generate(2, 10, 10, seed=0)
        with pytest.raises(ValueError):
            generate(3, 0, 5, seed=0)

    def test_matches_reference_rng(self):
        # the compiled generator must replay the documented pure-python RNG
        inst = generate(3, 37, 11, seed=42)
        ref = Xoshiro256PP(42)
        for i in range(11):
            expect = [ref.below(37) for _ in range(3)]
            bit = ref.bit()
            assert list(inst.slots[i]) == expect
            assert int(inst.rhs[i]) == bit

    def test_occurrence_counts_binomial(self):
        # occurrences of variable 0 per instance ~ Binomial(k n, 1/m);
        # chi-square against the exact pmf must not reject at p = 0.001
        k, m, n, reps = 3, 100, 100, 10**4
        counts = np.zeros(40, dtype=np.int64)
        for i in range(reps):
            inst = generate(k, m, n, seed=derive_seed(2024, i))
            occ = int(np.count_nonzero(inst.slots_flat == 0))
            counts[min(occ, 39)] += 1
        dist = stats.binom(k * n, 1.0 / m)
        # merge bins so every expected count >= 5
        edges = []
        acc_p = 0.0
        start = 0
        for j in range(40):
            acc_p += dist.pmf(j) if j < 39 else 1.0 - dist.cdf(38)
            if acc_p * reps >= 5.0:
                edges.append((start, j, acc_p))
                start, acc_p = j + 1, 0.0
        if acc_p > 0:
            s, e, p = edges[-1]
            edges[-1] = (s, 39, p + acc_p)
        obs = np.array([counts[s : e + 1].sum() for s, e, _ in edges], dtype=float)
        exp = np.array([p * reps for _, _, p in edges])
        chi2 = float(((obs - exp) ** 2 / exp).sum())
        pval = stats.chi2.sf(chi2, df=len(edges) - 1)
        assert pval > 0.001, f"chi2={chi2:.2f}, p={pval:.2e}"

    def test_structural_properties(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            m = int(rng.integers(1, 40))
            n = int(rng.integers(0, 40))
            inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
            assert inst.slots_flat.size == 3 * n
            if n:
                assert inst.slots_flat.min() >= 0 and inst.slots_flat.max() < m
            assert int(degrees(inst).deg.sum()) == 3 * n


class TestDegrees:
    def test_multiplicity(self):
        inst = make_instance(3, 2, [((0, 0, 1), 1)])
        table = degrees(inst)
        assert table.deg.tolist() == [2, 1]
        assert table.counts == (0, 1, 1)

    def test_empty(self):
        inst = make_instance(3, 4, [])
        table = degrees(inst)
        assert table.deg.tolist() == [0, 0, 0, 0]
        assert table.counts == (4, 0, 0)

    def test_two_equations(self):
        inst = make_instance(3, 6, [((0, 1, 2), 0), ((0, 3, 4), 1)])
        table = degrees(inst)
        assert table.deg.tolist() == [2, 1, 1, 1, 1, 0]
        assert table.counts == (1, 4, 1)

    def test_removed(self):
        inst = make_instance(3, 6, [((0, 1, 2), 0), ((0, 3, 4), 1)])
        table = degrees(inst, removed={1})
        assert table.deg.tolist() == [1, 1, 1, 0, 0, 0]
        assert table.counts == (3, 3, 0)
        with pytest.raises(ValueError):
            degrees(inst, removed={7})

    def test_counts_consistent(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            inst = generate(3, int(rng.integers(1, 30)), int(rng.integers(0, 30)), seed=int(rng.integers(0, 2**63)))
            t = degrees(inst)
            assert sum(t.counts) == inst.m
            assert t.counts[1] == int(np.count_nonzero(t.deg == 1))


class TestCodec:
    def test_round_trip_single(self):
        inst = make_instance(3, 2, [((0, 0, 1), 1)])
        assert decode(encode(inst)) == inst

    def test_format_definition(self):
        inst = decode("3 2 1\n0 0 1 1\n")
        assert (inst.k, inst.m, inst.n) == (3, 2, 1)
        assert inst.slots[0].tolist() == [0, 0, 1]
        assert int(inst.rhs[0]) == 1

    def test_out_of_range_index(self):
        with pytest.raises(ParseError, match="line 2"):
            decode("3 2 1\n0 0 2 1\n")

    def test_malformed(self):
        with pytest.raises(ParseError, match="line 1"):
            decode("3 2\n")
        with pytest.raises(ParseError, match="line 2"):
            decode("3 2 1\n0 0 1 2\n")  # bit not in {0, 1}
        with pytest.raises(ParseError, match="line 2"):
            decode("3 2 1\n0 0 1\n")  # missing bit
        with pytest.raises(ParseError):
            decode("3 2 2\n0 0 1 1\n")  # wrong equation count
        with pytest.raises(ParseError, match="line 2"):
            decode("3 2 1\nx 0 1 1\n")

    def test_canonical_exact(self):
        inst = make_instance(3, 2, [((0, 0, 1), 1)])
        assert encode(inst) == "3 2 1\n0 0 1 1\n"

    def test_round_trip_random(self):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            m = int(rng.integers(1, 25))
            n = int(rng.integers(0, 25))
            inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
            again = decode(encode(inst))
            assert again == inst
            assert encode(again) == encode(inst)

    def test_missing_final_newline_ok(self):
        inst = decode("3 2 1\n0 1 1 0")
        assert inst.n == 1


def test_trial_seed_derivation():
    g1, p1 = trial_seeds(7, 0)
    g2, p2 = trial_seeds(7, 1)
    assert len({g1, p1, g2, p2}) == 4
    assert trial_seeds(7, 0) == (g1, p1)
    t = derive_seed(7, 1)
    assert trial_seeds(7, 1) == (derive_seed(t, 1), derive_seed(t, 2))
