"""Fast self-check battery backing the `validate` CLI subcommand.

Each check returns (name, passed, detail).  These are compact versions of
the pytest suite's invariants, runnable in seconds on an installed package
without test infrastructure.
"""

from __future__ import annotations

import math

import numpy as np

from . import gf2, theory
from .experiments import ScanConfig, run_scan
from .instance import decode, degrees, encode, generate
from .peel import core_of, peel_run
from .rng import Xoshiro256PP
from .theory import StatePoint, drift, jacobian, kernel_probs, thresholds

Check = tuple[str, bool, str]


def _random_admissible_states(count: int, k: int, seed: int) -> list[StatePoint]:
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        theta = rng.uniform(0.0, 0.9)
        budget = k * (1.0 - theta)
        x1 = rng.uniform(-1.0, budget)
        x2 = rng.uniform(0.0, (budget - max(x1, 0.0)) / 2.0)
        states.append(StatePoint(x1, x2, theta))
    return states


def check_f1(k_values=(3, 4)) -> Check:
    lam = np.linspace(1e-6, 50.0, 4001)
    vals = [theory.f1(x) for x in lam]
    mono = all(b > a for a, b in zip(vals, vals[1:]))
    root = all(abs(theory.f1(thresholds(k).lambda_k) - k) < 1e-9 for k in k_values)
    rt = all(abs(theory.f1_inv(theory.f1(x)) - x) < 1e-9 * max(1.0, x) for x in (0.3, 1.7, 5.0, 20.0))
    ok = mono and root and rt
    return "f1 monotone, defining roots, inverse round-trip", ok, ""


def check_thresholds() -> Check:
    c3, c4 = thresholds(3), thresholds(4)
    ok = (
        abs(c3.lambda_k - 2.1491258) < 1e-4
        and abs(c3.rho_k - 1.0894014) < 1e-4
        and abs(c3.theta_k - 0.3105659) < 1e-4
        and abs(c3.rho_core - 1.2217931) < 1e-4
        and abs(c4.rho_k - 1.0237823) < 1e-4
    )
    return "threshold constants (k=3, 4)", ok, ""


def check_critical_identities() -> Check:
    ok = True
    for k in (3, 4):
        c = thresholds(k)
        y1, y2 = theory._y_raw(c.theta_k, c.rho_k, k)
        lam = kernel_probs(StatePoint(max(y1, 0.0), y2, c.theta_k), k).lam
        ok &= abs(y1) < 1e-9 and abs(y2 - (1.0 - c.theta_k)) < 1e-9
        ok &= abs(lam - c.lambda_k) < 1e-7
        dth, drh = theory.crit_derivatives(k)
        ok &= abs(dth[0] + dth[1] + 1.0) < 1e-9
        ok &= abs(drh[0] + drh[1] - (1.0 - (1.0 + c.lambda_k) * math.exp(-c.lambda_k))) < 1e-9
        ok &= dth[0] < 0 and dth[1] < 0
    return "critical-point identities", bool(ok), ""


def check_kernel_probs() -> Check:
    worst = 0.0
    for s in _random_admissible_states(2000, 3, seed=11):
        p = kernel_probs(s, 3)
        worst = max(worst, abs(p.p0 + p.p1 + p.p2 - 1.0))
        f1_, f2_ = drift(s, 3)
        worst = max(worst, abs(f1_ + f2_ + 1.0 + 2.0 * p.p0))
    return "kernel probabilities sum to 1; drift identity", worst < 1e-12, f"worst={worst:.2e}"


def check_ode_consistency() -> Check:
    # finite differences of the closed form against the drift
    sup = 0.0
    for k, rho in ((3, thresholds(3).rho_k), (4, thresholds(4).rho_k)):
        th_k = thresholds(k).theta_k
        h = 1e-6
        for theta in np.linspace(h, th_k - 1e-3, 200):
            y1a, y2a = theory._y_raw(theta - h, rho, k)
            y1b, y2b = theory._y_raw(theta + h, rho, k)
            y1, y2 = theory._y_raw(theta, rho, k)
            f = drift(StatePoint(y1, y2, theta), k)
            sup = max(sup, abs((y1b - y1a) / (2 * h) - f[0]), abs((y2b - y2a) / (2 * h) - f[1]))
    return "closed form solves the mean ODE", sup < 1e-6, f"sup={sup:.2e}"


def check_jacobian_fd() -> Check:
    rng = np.random.default_rng(5)
    h = 1e-6
    worst = 0.0
    tried = 0
    for s in _random_admissible_states(200, 3, seed=7):
        if s.x1 < 0.05 or s.x2 < 0.05:
            continue
        budget = 3 * (1.0 - s.theta)
        if max(s.x1, 0.0) + 2 * (s.x2 + h) > budget or s.x1 + h + 2 * s.x2 > budget:
            continue
        tried += 1
        a = jacobian(s, 3)
        for col, (dx1, dx2) in enumerate(((h, 0.0), (0.0, h))):
            fp = drift(StatePoint(s.x1 + dx1, s.x2 + dx2, s.theta), 3)
            fm = drift(StatePoint(s.x1 - dx1, s.x2 - dx2, s.theta), 3)
            for row in range(2):
                fd = (fp[row] - fm[row]) / (2 * h)
                worst = max(worst, abs(a[row, col] - fd) / max(1.0, abs(fd)))
        if tried >= 50:
            break
    del rng
    return "analytic Jacobian matches finite differences", worst < 1e-6, f"worst rel={worst:.2e}"


def check_q_integration() -> Check:
    c = thresholds(3)
    q0 = theory.q_init(c.rho_k, 3)
    q_small = theory.q_integrate(c.rho_k, 3, 1e-6)
    cont = max(
        abs(q_small.q11 - q0.q11), abs(q_small.q12 - q0.q12), abs(q_small.q22 - q0.q22)
    )
    q = theory.q_integrate(c.rho_k, 3, c.theta_k)
    ok = cont < 1e-5 and q.is_psd() and q0.is_psd()
    return "covariance integration continuity and PD", ok, f"cont={cont:.2e}"


def check_gf2_oracle() -> Check:
    rng = np.random.default_rng(42)
    for i in range(200):
        m = int(rng.integers(1, 11))
        n = int(rng.integers(0, 13))
        inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
        sys_ = gf2.from_instance(inst)
        res = gf2.solve(sys_, want_witness=True)
        if res.satisfiable != gf2.brute_force(sys_):
            return "gf2 solve vs brute force", False, f"mismatch at case {i}"
        if res.satisfiable and not gf2.check_witness(sys_, res.witness):
            return "gf2 solve vs brute force", False, f"bad witness at case {i}"
    return "gf2 solve vs brute force (200 cases)", True, ""


def check_core() -> Check:
    rng = np.random.default_rng(3)
    for i in range(20):
        inst = generate(3, 110, 100, seed=int(rng.integers(0, 2**63)))
        cores = set()
        for s in range(5):
            _, core = peel_run(inst, seed=s)
            cores.add(tuple(core.core_eq_indices.tolist()))
        if len(cores) != 1:
            return "core order-independence", False, f"instance {i} gave {len(cores)} cores"
        # degree conservation along the trace
        trace, core = peel_run(inst, seed=99)
        dt = degrees(inst, removed=set(range(inst.n)) - set(core.core_eq_indices.tolist()))
        if int(dt.deg.sum()) != 3 * core.n_core:
            return "core order-independence", False, "degree conservation broke"
        # satisfiability preserved by peeling (small oracle)
        small = generate(3, 10, 12, seed=1000 + i)
        full = gf2.solve(gf2.from_instance(small)).satisfiable
        sub = core_of(small)
        core_sat = gf2.solve(gf2.from_instance(small, subset=sub.core_eq_indices)).satisfiable
        if full != core_sat:
            return "core order-independence", False, "sat(instance) != sat(core)"
    return "core order-independence, conservation, sat-preservation", True, ""


def check_codec() -> Check:
    rng = np.random.default_rng(17)
    for _ in range(100):
        m = int(rng.integers(1, 30))
        n = int(rng.integers(0, 30))
        inst = generate(3, m, n, seed=int(rng.integers(0, 2**63)))
        if decode(encode(inst)) != inst:
            return "instance text round-trip", False, "mismatch"
    return "instance text round-trip (100 cases)", True, ""


def check_rng_parity() -> Check:
    # python xoshiro must agree with the compiled generation path
    from . import _fast

    seed = 987654321
    ref = Xoshiro256PP(seed)
    expect = []
    for _ in range(7):
        vals = [ref.below(50) for _ in range(3)]
        vals.append(ref.bit())
        expect.append(vals)
    slots, rhs = _fast.fill_instance(3, 50, 7, np.uint64(seed))
    got = [
        [int(slots[3 * e]), int(slots[3 * e + 1]), int(slots[3 * e + 2]), int(rhs[e])]
        for e in range(7)
    ]
    return "python/compiled RNG parity", got == expect, ""


def check_scan_determinism() -> Check:
    base = dict(k=3, n_values=(300,), r_values=(0.0,), trials=24, master_seed=99)
    rows1 = run_scan(ScanConfig(**base, threads=1))
    rows2 = run_scan(ScanConfig(**base, threads=2))
    return "scan determinism across thread budgets", rows1 == rows2, ""


ALL_CHECKS = (
    check_f1,
    check_thresholds,
    check_critical_identities,
    check_kernel_probs,
    check_ode_consistency,
    check_jacobian_fd,
    check_q_integration,
    check_gf2_oracle,
    check_core,
    check_codec,
    check_rng_parity,
    check_scan_determinism,
)


def run_all() -> list[Check]:
    results = []
    for fn in ALL_CHECKS:
        try:
            results.append(fn())
        except Exception as exc:  # a crash is a failure, not an abort
            results.append((fn.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return results
