"""Seeded Monte Carlo harness: scans, trajectories, surplus stats, kernels.

Every trial is a pure function of (config, trial index): per-cell and
per-trial seeds come from :func:`xorwindow.rng.derive_seed`, results are
written into arrays indexed by trial and reduced afterwards, so outputs do
not depend on the thread budget or scheduling.

The scan decides satisfiability per trial either exactly (GF(2) solve of
the 2-core subsystem, equivalent to solving the full system) or by the
surplus-sign proxy (sat iff m_core - n_core >= 0).  An empty core counts
as satisfiable with surplus 0.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _fast, theory
from .instance import generate, m_from_r, trial_seeds
from .peel import peel_run, sample_kernel
from .rng import derive_seed
from .theory import StatePoint, normal_cdf, theta_star

SAT_MODES = ("exact-gf2-on-core", "surplus-sign")

SCAN_COLUMNS = (
    "k,n,r,m,trials,sat_count,p_hat,ci_lo,ci_hi,phi_pred,"
    "surplus_mean_scaled,surplus_var_scaled,core_n_mean,core_m_mean,empty_core_count"
)

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ScanConfig:
    k: int
    n_values: tuple[int, ...]
    r_values: tuple[float, ...]
    trials: int
    master_seed: int
    sat_mode: str = "exact-gf2-on-core"
    threads: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.n_values or not self.r_values:
            raise ValueError("n_values and r_values must be nonempty")
        if any(n < 100 for n in self.n_values):
            raise ValueError("scan requires n >= 100 (asymptotic regime)")
        if self.sat_mode not in SAT_MODES:
            raise ValueError(f"sat_mode must be one of {SAT_MODES}, got {self.sat_mode!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class ScanRow:
    k: int
    n: int
    r: float
    m: int
    trials: int
    sat_count: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    phi_pred: float
    surplus_mean_scaled: float
    surplus_var_scaled: float
    core_n_mean: float
    core_m_mean: float
    empty_core_count: int


@dataclass(frozen=True)
class TrajReport:
    k: int
    n: int
    rho: float
    trials: int
    tau: np.ndarray
    z1_mean: np.ndarray
    z2_mean: np.ndarray
    y1_theory: np.ndarray  # n * y1(tau/n)
    y2_theory: np.ndarray
    max_dev: float
    normalized_dev: float  # max_dev / sqrt(n log n)


@dataclass(frozen=True)
class SurplusReport:
    k: int
    n: int
    r: float
    m: int
    trials: int
    mean_scaled: float  # mean of surplus / sqrt(n)
    var_scaled: float
    skew_scaled: float
    se_mean: float  # sample sd / sqrt(trials)
    theory_mean: float  # r * mu
    theory_var: float  # sigma^2


@dataclass(frozen=True)
class KernelCompareReport:
    k: int
    n: int
    rho: float
    trials: int
    tau: np.ndarray
    mean_exact: np.ndarray  # shape (len(tau), 2), units of z (not z/n)
    mean_approx: np.ndarray
    sd_exact: np.ndarray
    sd_approx: np.ndarray
    sup_mean_diff: float  # sup_tau ||mean_exact - mean_approx|| / n
    truncations: int  # approximate-chain inadmissibility events


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; correct coverage near 0 and 1."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _run_cell(
    k: int, m: int, n: int, trials: int, cell_seed: int, exact: bool, threads: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run one (n, r) cell; per-trial results land in trial-indexed arrays."""
    sat = np.zeros(trials, dtype=np.int64)
    n_core = np.zeros(trials, dtype=np.int64)
    m_core = np.zeros(trials, dtype=np.int64)

    def work(t: int) -> None:
        gen_seed, peel_seed = trial_seeds(cell_seed, t)
        s, nc, mc = _fast.scan_trial(k, m, n, np.uint64(gen_seed), np.uint64(peel_seed), exact)
        sat[t] = s
        n_core[t] = nc
        m_core[t] = mc

    if threads <= 1:
        for t in range(trials):
            work(t)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(trials)))
    return sat, n_core, m_core


def run_scan(cfg: ScanConfig) -> list[ScanRow]:
    """Monte Carlo satisfiability scan over the (n, r) grid."""
    cfg.validate()
    consts = theory.constants(cfg.k)
    exact = cfg.sat_mode == "exact-gf2-on-core"
    rows: list[ScanRow] = []
    cell = 0
    for n in cfg.n_values:
        sqrt_n = math.sqrt(n)
        for r in cfg.r_values:
            m = m_from_r(cfg.k, n, r, consts.rho_k)
            cell_seed = derive_seed(cfg.master_seed, cell)
            sat, n_core, m_core = _run_cell(cfg.k, m, n, cfg.trials, cell_seed, exact, cfg.threads)
            surplus_scaled = (m_core - n_core) / sqrt_n
            var = float(np.var(surplus_scaled, ddof=1)) if cfg.trials > 1 else 0.0
            sat_count = int(sat.sum())
            ci_lo, ci_hi = wilson_interval(sat_count, cfg.trials)
            rows.append(
                ScanRow(
                    k=cfg.k,
                    n=n,
                    r=float(r),
                    m=m,
                    trials=cfg.trials,
                    sat_count=sat_count,
                    p_hat=sat_count / cfg.trials,
                    ci_lo=ci_lo,
                    ci_hi=ci_hi,
                    phi_pred=normal_cdf(r * consts.s_k),
                    surplus_mean_scaled=float(surplus_scaled.mean()),
                    surplus_var_scaled=var,
                    core_n_mean=float(n_core.mean()),
                    core_m_mean=float(m_core.mean()),
                    empty_core_count=int(np.count_nonzero(n_core == 0)),
                )
            )
            cell += 1
    return rows


def _check_rho_branch(rho: float, k: int) -> None:
    c = theory.thresholds(k)
    if not c.rho_k - 0.2 <= rho <= c.rho_core - 0.01:
        raise ValueError(
            f"rho={rho} outside [{c.rho_k - 0.2:.4f}, {c.rho_core - 0.01:.4f}]"
            " where the mean-trajectory branch is valid"
        )


def _theory_curve(n: int, taus: np.ndarray, rho: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    y1 = np.empty(taus.size)
    y2 = np.empty(taus.size)
    for i, t in enumerate(taus):
        y1[i], y2[i] = theory._y_raw(t / n, rho, k)
    return n * y1, n * y2


def run_trajectory(
    k: int, n: int, rho: float, trials: int, seed: int, epsilon: float = 0.1
) -> TrajReport:
    """Mean exact-peeling trajectory against n * y(tau/n).

    Trials stopped before the grid end are padded with their stopped state.
    The grid is capped at both n(1 - epsilon) and the validity window
    theta_star(rho) of the closed-form trajectory.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 100:
        raise ValueError(f"n must be >= 100, got {n}")
    _check_rho_branch(rho, k)
    m = math.floor(n * rho)
    tau_max = math.floor(n * min(1.0 - epsilon, theta_star(rho, k)))
    grid = tau_max + 1
    sum_z1 = np.zeros(grid)
    sum_z2 = np.zeros(grid)
    for t in range(trials):
        gen_seed, peel_seed = trial_seeds(seed, t)
        inst = generate(k, m, n, gen_seed)
        trace, _ = peel_run(inst, peel_seed)
        take = min(trace.z1.size, grid)
        sum_z1[:take] += trace.z1[:take]
        sum_z2[:take] += trace.z2[:take]
        if take < grid:
            sum_z1[take:] += trace.z1[-1]
            sum_z2[take:] += trace.z2[-1]
    z1_mean = sum_z1 / trials
    z2_mean = sum_z2 / trials
    taus = np.arange(grid, dtype=np.int64)
    y1_th, y2_th = _theory_curve(n, taus, rho, k)
    dev = np.hypot(z1_mean - y1_th, z2_mean - y2_th)
    max_dev = float(dev.max())
    return TrajReport(
        k=k,
        n=n,
        rho=rho,
        trials=trials,
        tau=taus,
        z1_mean=z1_mean,
        z2_mean=z2_mean,
        y1_theory=y1_th,
        y2_theory=y2_th,
        max_dev=max_dev,
        normalized_dev=max_dev / math.sqrt(n * math.log(n)),
    )


def surplus_stats(
    k: int, n: int, r: float, trials: int, seed: int, threads: int = 1
) -> SurplusReport:
    """Moments of surplus/sqrt(n) at m = floor(n rho_k + r sqrt(n))."""
    if trials < 2:
        raise ValueError("surplus_stats needs trials >= 2")
    consts = theory.constants(k)
    m = m_from_r(k, n, r, consts.rho_k)
    cell_seed = derive_seed(seed, 0)
    _, n_core, m_core = _run_cell(k, m, n, trials, cell_seed, exact=False, threads=threads)
    x = (m_core - n_core) / math.sqrt(n)
    mean = float(x.mean())
    var = float(np.var(x, ddof=1))
    sd = math.sqrt(var)
    centered = x - mean
    skew = float(np.mean(centered**3) / sd**3) if sd > 0 else 0.0
    return SurplusReport(
        k=k,
        n=n,
        r=float(r),
        m=m,
        trials=trials,
        mean_scaled=mean,
        var_scaled=var,
        skew_scaled=skew,
        se_mean=sd / math.sqrt(trials),
        theory_mean=r * consts.mu,
        theory_var=consts.sigma**2,
    )


def compare_kernels(
    k: int,
    n: int,
    rho: float,
    trials: int,
    seed: int,
    theta_max: Optional[float] = None,
) -> KernelCompareReport:
    """Exact peeling chain versus the approximate kernel chain.

    Both start from the same z(0) per trial.  If the approximate chain
    leaves kernel admissibility the event is counted and the trajectory is
    padded with its last admissible state.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_rho_branch(rho, k)
    if theta_max is None:
        theta_max = theta_star(rho, k) - 0.02
    if not 0.0 < theta_max <= theta_star(rho, k):
        raise ValueError(f"theta_max={theta_max} outside (0, theta_star]")
    m = math.floor(n * rho)
    tau_max = math.floor(n * theta_max)
    grid = tau_max + 1
    se = np.zeros((grid, 2))
    se2 = np.zeros((grid, 2))
    sa = np.zeros((grid, 2))
    sa2 = np.zeros((grid, 2))
    truncations = 0
    for t in range(trials):
        t_seed = derive_seed(seed, t)
        gen_seed = derive_seed(t_seed, 1)
        peel_seed = derive_seed(t_seed, 2)
        kern_rng = np.random.default_rng(derive_seed(t_seed, 3))
        inst = generate(k, m, n, gen_seed)
        trace, _ = peel_run(inst, peel_seed)

        take = min(trace.z1.size, grid)
        ze = np.empty((grid, 2))
        ze[:take, 0] = trace.z1[:take]
        ze[:take, 1] = trace.z2[:take]
        ze[take:, 0] = trace.z1[-1]
        ze[take:, 1] = trace.z2[-1]
        se += ze
        se2 += ze * ze

        za = np.empty((grid, 2))
        z1p, z2p = float(trace.z1[0]), float(trace.z2[0])
        tau = 0
        while True:
            za[tau, 0] = z1p
            za[tau, 1] = z2p
            if tau == tau_max:
                break
            theta = tau / n
            admissible = z2p >= 0.0 and max(z1p, 0.0) + 2.0 * z2p <= k * n * (1.0 - theta)
            if not admissible:
                truncations += 1
                za[tau + 1 :] = za[tau]
                break
            d1, d2 = sample_kernel(StatePoint(z1p / n, z2p / n, theta), k, kern_rng)
            z1p += d1
            z2p += d2
            tau += 1
        sa += za
        sa2 += za * za

    mean_e = se / trials
    mean_a = sa / trials
    var_e = np.maximum(se2 / trials - mean_e**2, 0.0)
    var_a = np.maximum(sa2 / trials - mean_a**2, 0.0)
    diff = np.linalg.norm(mean_e - mean_a, axis=1)
    return KernelCompareReport(
        k=k,
        n=n,
        rho=rho,
        trials=trials,
        tau=np.arange(grid, dtype=np.int64),
        mean_exact=mean_e,
        mean_approx=mean_a,
        sd_exact=np.sqrt(var_e),
        sd_approx=np.sqrt(var_a),
        sup_mean_diff=float(diff.max()) / n,
        truncations=truncations,
    )


# ---------------------------------------------------------------------------
# serialization (all floats printed with 9 significant digits)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".9g")
    return str(x)


def scan_rows_csv(rows: Sequence[ScanRow]) -> str:
    out = io.StringIO()
    out.write(SCAN_COLUMNS + "\n")
    for row in rows:
        vals = [getattr(row, name) for name in SCAN_COLUMNS.split(",")]
        out.write(",".join(_fmt(v) for v in vals) + "\n")
    return out.getvalue()


def scan_rows_json(rows: Sequence[ScanRow]) -> str:
    cols = SCAN_COLUMNS.split(",")
    payload = [{name: _round9(getattr(row, name)) for name in cols} for row in rows]
    return json.dumps({"rows": payload}, indent=2) + "\n"


def traj_csv(rep: TrajReport) -> str:
    out = io.StringIO()
    out.write("tau,z1_mean,z2_mean,y1_theory,y2_theory\n")
    for i in range(rep.tau.size):
        out.write(
            f"{rep.tau[i]},{_fmt(float(rep.z1_mean[i]))},{_fmt(float(rep.z2_mean[i]))},"
            f"{_fmt(float(rep.y1_theory[i]))},{_fmt(float(rep.y2_theory[i]))}\n"
        )
    return out.getvalue()


def _round9(x):
    if isinstance(x, float):
        return float(format(x, ".9g"))
    return x
