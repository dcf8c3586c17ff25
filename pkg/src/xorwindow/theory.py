"""Analytic layer: thresholds, mean trajectory, fluctuation covariance.

The peeling process on a random k-XORSAT instance with m ~ rho*n variables
concentrates around a mean path y(theta) = (y1, y2) (variables of degree 1
and >= 2 per equation budget, at scaled time theta).  This module carries
everything analytic about that picture:

* f1(lam) = lam(e^lam - 1)/(e^lam - 1 - lam), the truncated-Poisson mean
  function, its inverse and derivative (series branch below lam = 1/4 where
  e^lam - 1 - lam cancels catastrophically);
* thresholds: lambda_k solving f1 = k, the SAT-UNSAT ratio rho_k, the
  critical stopping time theta_k and the core-appearance ratio rho_core;
* the closed-form trajectory y(theta, rho) with u = (1-theta)^(1/k),
  gamma = k/rho, valid until y1 first hits 0 (theta_star);
* step-distribution quantities at a scaled state: probabilities
  (p0, p1, p2) with the tilt lam solving f1(lam) = (k(1-theta) - x1+)/x2,
  drift F, Jacobian A = dF/dx, and per-step noise covariance G;
* the fluctuation covariance Q(theta): dQ = G + AQ + QA^T from the
  degree-count covariance Q(0) of the initial ensemble, integrated with
  fixed-step RK4, plus the O(1/n) discrete recursion used as a
  cross-method oracle;
* the scaling constant s_k = mu/sigma where mu = d(y1+y2)/drho and
  sigma^2 = (1,1) Q(theta_k) (1,1)^T at the critical point, so that the
  satisfiability probability at m = floor(n rho_k + r sqrt(n)) approaches
  Phi(r * s_k).

Everything is a pure function of k (3..16); assembled constants are cached.

Useful exact identities used throughout (checked in the test suite):
D(lam) := lam^2/(e^lam - 1 - lam) = f1(lam) - lam, and along the
closed-form trajectory the tilt is lam(theta) = gamma * u^(k-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional
from warnings import warn

import numpy as np

__all__ = [
    "NumericError",
    "ValidityWarning",
    "TheoryConstants",
    "StatePoint",
    "KernelProbs",
    "SymMatrix2",
    "f1",
    "f1_prime",
    "f1_inv",
    "thresholds",
    "theta_star",
    "y_init",
    "y_closed",
    "kernel_probs",
    "drift",
    "jacobian",
    "noise_cov",
    "q_init",
    "q_integrate",
    "discrete_moments",
    "crit_derivatives",
    "scaling_constant",
    "constants",
    "normal_cdf",
]

K_MIN, K_MAX = 3, 16


class NumericError(RuntimeError):
    """A numerical routine failed its own convergence or self-check."""


class ValidityWarning(UserWarning):
    """Closed-form trajectory evaluated beyond its validity window."""


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class SymMatrix2:
    """Symmetric 2x2 matrix as the (q11, q12, q22) triple."""

    q11: float
    q12: float
    q22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])

    @property
    def det(self) -> float:
        return self.q11 * self.q22 - self.q12 * self.q12

    @property
    def sum_all(self) -> float:
        """(1,1) Q (1,1)^T = q11 + 2 q12 + q22."""
        return self.q11 + 2.0 * self.q12 + self.q22

    def is_psd(self, tol: float = 1e-12) -> bool:
        return self.q11 >= -tol and self.q22 >= -tol and self.det >= -tol


@dataclass(frozen=True)
class StatePoint:
    """Scaled chain state: x = z/n, theta = tau/n."""

    x1: float
    x2: float
    theta: float


@dataclass(frozen=True)
class KernelProbs:
    p0: float
    p1: float
    p2: float
    lam: float  # tilt; inf when x2 = 0, 0 on the boundary f1 -> 2


@dataclass(frozen=True)
class TheoryConstants:
    k: int
    lambda_k: float
    rho_k: float
    theta_k: float
    rho_core: float
    y_crit: Optional[tuple[float, float]] = None
    dy_dtheta: Optional[tuple[float, float]] = None  # left derivative at theta_k
    dy_drho: Optional[tuple[float, float]] = None
    q_crit: Optional[SymMatrix2] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None
    s_k: Optional[float] = None

    def as_dict(self) -> dict:
        d = {
            "k": self.k,
            "lambda_k": self.lambda_k,
            "rho_k": self.rho_k,
            "theta_k": self.theta_k,
            "rho_core": self.rho_core,
        }
        if self.s_k is not None:
            d.update(
                {
                    "y_crit": list(self.y_crit),
                    "dy_dtheta": list(self.dy_dtheta),
                    "dy_drho": list(self.dy_drho),
                    "Q_crit": [self.q_crit.q11, self.q_crit.q12, self.q_crit.q22],
                    "mu": self.mu,
                    "sigma": self.sigma,
                    "s_k": self.s_k,
                }
            )
        return d


# ---------------------------------------------------------------------------
# f1 and friends

_SERIES_CUT = 0.25

# Taylor coefficients at 0 of f1 and f1'; the denominator e^l - 1 - l loses
# ~2 log10(1/l) digits below the cut, the series loses none.
_F1_COEF = (
    2.0,
    1.0 / 3,
    1.0 / 18,
    1.0 / 270,
    -1.0 / 3240,
    -1.0 / 13608,
    -1.0 / 2041200,
    1.0 / 874800,
    13.0 / 146966400,
    -307.0 / 24249456000,
    -479.0 / 203695430400,
    167.0 / 3610964448000,
)
_F1P_COEF = (
    1.0 / 3,
    1.0 / 9,
    1.0 / 90,
    -1.0 / 810,
    -5.0 / 13608,
    -1.0 / 340200,
    7.0 / 874800,
    13.0 / 18370800,
    -307.0 / 2694384000,
    -479.0 / 20369543040,
    1837.0 / 3610964448000,
    100921.0 / 198603044640000,
)


def _poly(coef: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coef):
        acc = acc * x + c
    return acc


def f1(lam: float) -> float:
    """lam (e^lam - 1) / (e^lam - 1 - lam); strictly increasing, f1(0+) = 2."""
    if lam < 0 or not math.isfinite(lam):
        raise ValueError(f"f1 requires lam >= 0, got {lam}")
    if lam < _SERIES_CUT:
        return _poly(_F1_COEF, lam)
    if lam > 700.0:
        return lam  # f1 - lam = lam^2/(e^lam - 1 - lam) underflows
    em1 = math.expm1(lam)
    return lam * em1 / (em1 - lam)


def f1_prime(lam: float) -> float:
    """d f1 / d lam = ((e^lam - 1)^2 - lam^2 e^lam) / (e^lam - 1 - lam)^2."""
    if lam < 0 or not math.isfinite(lam):
        raise ValueError(f"f1_prime requires lam >= 0, got {lam}")
    if lam < _SERIES_CUT:
        return _poly(_F1P_COEF, lam)
    if lam > 700.0:
        return 1.0
    em1 = math.expm1(lam)
    d = em1 - lam
    return (em1 * em1 - lam * lam * (em1 + 1.0)) / (d * d)


def f1_inv(v: float) -> float:
    """Unique lam >= 0 with f1(lam) = v, by bisection; requires v > 2."""
    if not v > 2.0:
        raise ValueError(f"f1_inv requires v > 2 (f1 > 2 on (0, inf)), got {v}")
    lo, hi = 1e-12, 64.0
    if f1(lo) >= v:
        return 3.0 * (v - 2.0)  # below bisection resolution; f1 ~ 2 + lam/3
    while f1(hi) < v:
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise NumericError(f"f1_inv bracket growth failed for v={v}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f1(mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, lo):
            break
    lam = 0.5 * (lo + hi)
    if abs(f1(lam) - v) > 1e-12 * max(1.0, abs(v)):
        raise NumericError(f"f1_inv failed to meet tolerance at v={v}")
    return lam


def _big_d(lam: float) -> float:
    """D(lam) = lam^2/(e^lam - 1 - lam) = f1(lam) - lam (exact identity)."""
    return f1(lam) - lam


# ---------------------------------------------------------------------------
# thresholds


def _check_k(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not K_MIN <= k <= K_MAX:
        raise ValueError(f"k must be an integer in [{K_MIN}, {K_MAX}], got {k!r}")


def _g_core(x: float, k: int) -> float:
    return k * (-math.expm1(-x)) ** (k - 1) / x


@lru_cache(maxsize=None)
def _core_argmax(k: int) -> float:
    """argmax of x -> k(1 - e^-x)^(k-1)/x, by golden-section to 1e-10."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 1e-3, 3.0 * k
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = _g_core(c, k), _g_core(d, k)
    while b - a > 1e-10:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = _g_core(c, k)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = _g_core(d, k)
    return 0.5 * (a + b)


@lru_cache(maxsize=None)
def thresholds(k: int) -> TheoryConstants:
    """lambda_k, rho_k, theta_k, rho_core (the rest of the record unfilled)."""
    _check_k(k)
    lam = f1_inv(float(k))
    s = -math.expm1(-lam)  # 1 - e^-lambda_k
    rho_k = k * s ** (k - 1) / lam
    theta_k = 1.0 - s**k
    rho_core = _g_core(_core_argmax(k), k)
    return TheoryConstants(k=int(k), lambda_k=lam, rho_k=rho_k, theta_k=theta_k, rho_core=rho_core)


def theta_star(rho: float, k: int) -> float:
    """First scaled time where the closed-form y1 would cross 0; 1 above rho_core."""
    _check_k(k)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    rho_core = thresholds(k).rho_core
    if rho > rho_core:
        return 1.0
    # lambda_rho: maximum positive solution of k(1-e^-x)^(k-1)/x = rho,
    # i.e. the root on the decreasing branch right of the argmax.
    lo = _core_argmax(k)
    hi = max(2.0 * lo, 4.0)
    while _g_core(hi, k) > rho:
        hi *= 2.0
        if hi > 1e9:
            raise NumericError(f"lambda_rho bracket growth failed for rho={rho}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _g_core(mid, k) > rho:
            lo = mid
        else:
            hi = mid
    lam_rho = 0.5 * (lo + hi)
    return 1.0 - (-math.expm1(-lam_rho)) ** k


# ---------------------------------------------------------------------------
# mean trajectory


def y_init(rho: float, k: int) -> tuple[float, float]:
    """Scaled (degree-1, degree->=2) counts of the initial ensemble."""
    _check_k(k)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    g = k / rho
    e = math.exp(-g)
    return k * e, rho * (1.0 - e) - k * e


def _y_raw(theta: float, rho: float, k: int) -> tuple[float, float]:
    # Closed form; no validity checks (it is analytic past theta_star and
    # the rho-derivative at the critical point needs that extension).
    u = (1.0 - theta) ** (1.0 / k)
    w = u ** (k - 1)
    g = k / rho
    e = math.exp(-g * w)
    y1 = k * w * (u - 1.0 + e)
    y2 = rho * (1.0 - e) - k * w * e
    return y1, y2


def y_closed(theta: float, rho: float, k: int) -> tuple[float, float]:
    """Mean trajectory y(theta, rho); warns past the validity window."""
    _check_k(k)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    if theta > theta_star(rho, k) + 1e-12:
        warn(
            f"y_closed evaluated at theta={theta} beyond theta_star={theta_star(rho, k):.6g}",
            ValidityWarning,
            stacklevel=2,
        )
    return _y_raw(theta, rho, k)


def _curve_lambda(theta: float, rho: float, k: int) -> float:
    """Tilt along the closed-form trajectory: lam = gamma u^(k-1), exactly."""
    return (k / rho) * (1.0 - theta) ** ((k - 1) / k)


# ---------------------------------------------------------------------------
# step distribution at a state


def _check_state(state: StatePoint, k: int) -> float:
    _check_k(k)
    x1, x2, theta = state.x1, state.x2, state.theta
    if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(theta)):
        raise ValueError(f"state must be finite, got {state}")
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    if x2 < 0.0:
        raise ValueError(f"x2 must be nonnegative, got {x2}")
    denom = k * (1.0 - theta)
    if max(x1, 0.0) + 2.0 * x2 > denom * (1.0 + 1e-12) + 1e-12:
        raise ValueError(f"inadmissible state {state}: max(x1,0) + 2 x2 > k(1-theta)")
    return denom


def kernel_probs(state: StatePoint, k: int) -> KernelProbs:
    """Slot probabilities (p0, p1, p2) and the tilt lam at a scaled state."""
    denom = _check_state(state, k)
    p0 = max(state.x1, 0.0) / denom
    x2 = state.x2
    if x2 == 0.0:
        return KernelProbs(p0=p0, p1=0.0, p2=1.0 - p0, lam=math.inf)
    rhs = (denom - max(state.x1, 0.0)) / x2
    if not math.isfinite(rhs):
        return KernelProbs(p0=p0, p1=0.0, p2=1.0 - p0, lam=math.inf)
    # Admissibility forces rhs >= 2; tolerate roundoff at the boundary.
    if rhs < 2.0 - 1e-9:
        raise AssertionError(f"rhs = {rhs} < 2 at admissible state {state}; invariant broken")
    if rhs <= 2.0:
        return KernelProbs(p0=p0, p1=2.0 * x2 / denom, p2=0.0, lam=0.0)
    lam = f1_inv(rhs)
    p1 = x2 * (rhs - lam) / denom  # x2 D(lam)/denom with D = f1 - lam = rhs - lam
    p2 = x2 * lam / denom
    return KernelProbs(p0=p0, p1=p1, p2=p2, lam=lam)


def drift(state: StatePoint, k: int) -> tuple[float, float]:
    """Expected kernel increment F = (-1 + (k-1)(p1 - p0), -(k-1)p1)."""
    p = kernel_probs(state, k)
    return -1.0 + (k - 1) * (p.p1 - p.p0), -(k - 1) * p.p1


def _jac_entries(denom: float, lam: float, k: int) -> tuple[float, float, float, float]:
    # Partials of F on the x1 > 0 branch, via the chain rule through
    # f1(lam) = (denom - x1)/x2; the state enters only via lam.
    # D = f1 - lam, D' = f1' - 1.
    rhs = f1(lam)
    fp = f1_prime(lam)
    dd = fp - 1.0
    big_d = rhs - lam
    c = (k - 1) / denom
    dp1_dx1 = -c * dd / fp
    dp1_dx2 = c * (big_d - rhs * dd / fp)
    a11 = dp1_dx1 - c
    a12 = dp1_dx2
    return a11, a12, -dp1_dx1, -dp1_dx2


def jacobian(state: StatePoint, k: int) -> np.ndarray:
    """A = dF/dx at a state with x1 > 0 and x2 > 0 (analytic, not FD)."""
    denom = _check_state(state, k)
    if state.x1 <= 0.0:
        raise ValueError(f"jacobian requires x1 > 0 (kink of max(x1, 0)), got x1={state.x1}")
    if state.x2 <= 0.0:
        raise ValueError(f"jacobian requires x2 > 0, got x2={state.x2}")
    lam = kernel_probs(state, k).lam
    a11, a12, a21, a22 = _jac_entries(denom, lam, k)
    return np.array([[a11, a12], [a21, a22]])


def noise_cov(state: StatePoint, k: int) -> SymMatrix2:
    """Per-step covariance of the kernel increment."""
    p = kernel_probs(state, k)
    return _noise_from_probs(p.p0, p.p1, k)


def _noise_from_probs(p0: float, p1: float, k: int) -> SymMatrix2:
    km1 = k - 1
    return SymMatrix2(
        q11=km1 * (p0 + p1 - (p0 - p1) ** 2),
        q12=-km1 * (p0 * p1 + p1 * (1.0 - p1)),
        q22=km1 * p1 * (1.0 - p1),
    )


# ---------------------------------------------------------------------------
# fluctuation covariance


def q_init(rho: float, k: int) -> SymMatrix2:
    """Covariance of z(0)/sqrt(n) on the initial ensemble (gamma = k/rho)."""
    _check_k(k)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    g = k / rho
    e2 = math.exp(-2.0 * g)
    eg = math.exp(g)
    q11 = (k / g) * g * e2 * (eg - 1.0 + g - g * g)
    q12 = -(k / g) * g * e2 * (eg - 1.0 - g * g)
    q22 = (k / g) * e2 * ((eg - 1.0) + g * (eg - 2.0) - g * g * (1.0 + g))
    return SymMatrix2(q11=q11, q12=q12, q22=q22)


def _q_rhs(theta: float, q: tuple[float, float, float], rho: float, k: int):
    # dQ/dtheta = G + A Q + Q A^T evaluated along the closed-form trajectory,
    # where the tilt has the exact form gamma u^(k-1) (no root-finding).
    y1, y2 = _y_raw(theta, rho, k)
    denom = k * (1.0 - theta)
    lam = _curve_lambda(theta, rho, k)
    p0 = max(y1, 0.0) / denom
    p1 = y2 * _big_d(lam) / denom
    a11, a12, a21, a22 = _jac_entries(denom, lam, k)
    g_mat = _noise_from_probs(p0, p1, k)
    q11, q12, q22 = q
    d11 = g_mat.q11 + 2.0 * (a11 * q11 + a12 * q12)
    d12 = g_mat.q12 + a11 * q12 + a12 * q22 + a21 * q11 + a22 * q12
    d22 = g_mat.q22 + 2.0 * (a21 * q12 + a22 * q22)
    return d11, d12, d22


def _rk4_q(rho: float, k: int, theta_end: float, steps: int) -> tuple[float, float, float]:
    q0 = q_init(rho, k)
    q = (q0.q11, q0.q12, q0.q22)
    h = theta_end / steps
    scale = max(1.0, q[0] * q[2])
    for i in range(steps):
        t = i * h
        k1 = _q_rhs(t, q, rho, k)
        k2 = _q_rhs(t + 0.5 * h, tuple(q[j] + 0.5 * h * k1[j] for j in range(3)), rho, k)
        k3 = _q_rhs(t + 0.5 * h, tuple(q[j] + 0.5 * h * k2[j] for j in range(3)), rho, k)
        k4 = _q_rhs(t + h, tuple(q[j] + h * k3[j] for j in range(3)), rho, k)
        q = tuple(q[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(3))
        if q[0] < 0.0 or q[2] < 0.0 or q[0] * q[2] - q[1] * q[1] < -1e-12 * scale:
            raise NumericError(
                f"covariance lost positive definiteness at theta={t + h:.6g} (rho={rho}, k={k})"
            )
    return q


def q_integrate(rho: float, k: int, theta_end: float) -> SymMatrix2:
    """Integrate dQ = G + AQ + QA^T from q_init; RK4 with step-halving check."""
    _check_k(k)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 0.0 < theta_end < 1.0:
        raise ValueError(f"theta_end must lie in (0, 1), got {theta_end}")
    if theta_end > theta_star(rho, k) + 1e-12:
        raise ValueError(
            f"theta_end={theta_end} beyond the x1 > 0 branch (theta_star={theta_star(rho, k):.6g})"
        )
    steps = 1 << 14
    prev = _rk4_q(rho, k, theta_end, steps)
    for _ in range(4):
        steps *= 2
        cur = _rk4_q(rho, k, theta_end, steps)
        if max(abs(cur[j] - prev[j]) for j in range(3)) < 1e-9:
            return SymMatrix2(*cur)
        prev = cur
    raise NumericError(f"q_integrate did not converge after 4 halvings (rho={rho}, k={k})")


def discrete_moments(n: int, rho: float, k: int) -> tuple[tuple[float, float], SymMatrix2]:
    """O(1/n) discrete mean/covariance recursion up to floor(n * theta_k).

    The linearized chain's moments obey
      y*(t+1) = y*(t) + A_t (y*(t) - y(t/n))/n + F(y(t/n), t/n)/n,
      Q_{t+1} = (I + A_t/n) Q_t (I + A_t/n)^T + G(y(t/n), t/n)/n,
    with the matrix products accumulated implicitly (state propagation, the
    product chain is never materialized).
    """
    _check_k(k)
    if n < 1000:
        raise ValueError(f"discrete_moments requires n >= 1000, got {n}")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    tau_n = math.floor(n * thresholds(k).theta_k)
    ys1, ys2 = y_init(rho, k)
    q0 = q_init(rho, k)
    q11, q12, q22 = q0.q11, q0.q12, q0.q22
    inv_n = 1.0 / n
    for tau in range(tau_n):
        theta = tau * inv_n
        y1, y2 = _y_raw(theta, rho, k)
        denom = k * (1.0 - theta)
        lam = _curve_lambda(theta, rho, k)
        p0 = max(y1, 0.0) / denom
        p1 = y2 * _big_d(lam) / denom
        f1_ = -1.0 + (k - 1) * (p1 - p0)
        f2_ = -(k - 1) * p1
        a11, a12, a21, a22 = _jac_entries(denom, lam, k)
        g_mat = _noise_from_probs(p0, p1, k)
        d1, d2 = ys1 - y1, ys2 - y2
        ys1 += inv_n * (a11 * d1 + a12 * d2 + f1_)
        ys2 += inv_n * (a21 * d1 + a22 * d2 + f2_)
        b11 = 1.0 + a11 * inv_n
        b12 = a12 * inv_n
        b21 = a21 * inv_n
        b22 = 1.0 + a22 * inv_n
        n11 = b11 * b11 * q11 + 2.0 * b11 * b12 * q12 + b12 * b12 * q22
        n12 = b11 * b21 * q11 + (b11 * b22 + b12 * b21) * q12 + b12 * b22 * q22
        n22 = b21 * b21 * q11 + 2.0 * b21 * b22 * q12 + b22 * b22 * q22
        q11 = n11 + g_mat.q11 * inv_n
        q12 = n12 + g_mat.q12 * inv_n
        q22 = n22 + g_mat.q22 * inv_n
    return (ys1, ys2), SymMatrix2(q11=q11, q12=q12, q22=q22)


# ---------------------------------------------------------------------------
# critical derivatives and the scaling constant


def _dy_dtheta_raw(theta: float, rho: float, k: int) -> tuple[float, float]:
    u = (1.0 - theta) ** (1.0 / k)
    w = u ** (k - 1)
    g = k / rho
    e = math.exp(-g * w)
    d1 = -((k - 1) / u) * (u - 1.0 + e) - 1.0 + (k - 1) * g * w * e / u
    d2 = -(k - 1) * g * w * e / u
    return d1, d2


def _dy_drho_raw(theta: float, rho: float, k: int) -> tuple[float, float]:
    u = (1.0 - theta) ** (1.0 / k)
    w = u ** (k - 1)
    g = k / rho
    gw = g * w
    e = math.exp(-gw)
    return gw * gw * e, (1.0 - e) - gw * e - gw * gw * e


def crit_derivatives(k: int) -> tuple[tuple[float, float], tuple[float, float]]:
    """(dy/dtheta, dy/drho) at (theta_k, rho_k); FD-verified at construction.

    The theta derivative is the left limit (the trajectory is followed only
    up to theta_k); the rho derivative differentiates the closed form, which
    extends smoothly through the critical point.
    """
    c = thresholds(k)
    th, rho = c.theta_k, c.rho_k
    dth = _dy_dtheta_raw(th, rho, k)
    drh = _dy_drho_raw(th, rho, k)

    h = 1e-5
    fd_th = tuple(
        (3.0 * a - 4.0 * b + cc) / (2.0 * h)
        for a, b, cc in zip(_y_raw(th, rho, k), _y_raw(th - h, rho, k), _y_raw(th - 2 * h, rho, k))
    )
    fd_rh = tuple(
        (a - b) / (2.0 * h) for a, b in zip(_y_raw(th, rho + h, k), _y_raw(th, rho - h, k))
    )
    for got, ref in zip(dth + drh, fd_th + fd_rh):
        if abs(got - ref) > 1e-4 * max(1.0, abs(got)):
            raise NumericError(
                f"critical-derivative self-check failed at k={k}: analytic {got} vs FD {ref}"
            )
    return dth, drh


@lru_cache(maxsize=None)
def scaling_constant(k: int) -> TheoryConstants:
    """Full constant record including s_k = mu/sigma; cached per k."""
    c = thresholds(k)
    y_crit = _y_raw(c.theta_k, c.rho_k, k)
    dth, drh = crit_derivatives(k)
    q_crit = q_integrate(c.rho_k, k, c.theta_k)
    mu = drh[0] + drh[1]
    var = q_crit.sum_all
    if not (mu > 0.0 and var > 0.0):
        raise NumericError(f"scaling constants failed sign checks at k={k}: mu={mu}, var={var}")
    sigma = math.sqrt(var)
    return TheoryConstants(
        k=c.k,
        lambda_k=c.lambda_k,
        rho_k=c.rho_k,
        theta_k=c.theta_k,
        rho_core=c.rho_core,
        y_crit=y_crit,
        dy_dtheta=dth,
        dy_drho=drh,
        q_crit=q_crit,
        mu=mu,
        sigma=sigma,
        s_k=mu / sigma,
    )


def constants(k: int) -> TheoryConstants:
    """Alias for the complete cached record."""
    return scaling_constant(k)


def normal_cdf(x: float) -> float:
    """Standard Gaussian distribution function via erfc."""
    if not math.isfinite(x):
        raise ValueError(f"normal_cdf requires finite x, got {x}")
    return 0.5 * math.erfc(-x / math.sqrt(2.0))
