"""Auxiliary numeric results: the Serrin-type inequality and the iteration lemma.

Both are implemented with fully explicit constants and come with randomized
counterexample search; the searches are the brute-force oracles for the test
suite and are expected to report zero violations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError


# ---------------------------------------------------------------------------
# Serrin-type bound: z^p <= sum a_i z^(q_i)  ==>  z <= N^(max gamma) sum a_i^(gamma_i)
#
# The statement is implemented in the "all comparison points equal z" form,
# which is the form the sup-norm argument actually invokes; with unrelated
# comparison points the conclusion fails in general.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SerrinInstance:
    p: float
    terms: tuple  # ((a_i, q_i), ...)

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError("p must be positive")
        for a, q in self.terms:
            if not a > 0:
                raise DomainError("coefficients a_i must be positive")
            if not (0 <= q < self.p):
                raise DomainError("exponents must satisfy 0 <= q_i < p")


def serrin_bound(p: float, terms) -> float:
    """Explicit bound N^(max_i gamma_i) * sum_i a_i^(gamma_i), gamma_i = 1/(p - q_i).

    Every z > 0 with z^p <= sum a_i z^(q_i) satisfies z <= this bound:
    the largest term dominates, so z^(p - q_i) <= N a_i for some i, and
    N^(gamma_i) <= N^(max gamma) since N >= 1.
    """
    inst = SerrinInstance(p, tuple((float(a), float(q)) for a, q in terms))
    gammas = np.array([1.0 / (p - q) for _, q in inst.terms])
    avals = np.array([a for a, _ in inst.terms])
    n = len(inst.terms)
    return float(n ** gammas.max() * np.sum(avals ** gammas))


def serrin_log_bound(p: float, log_a, q) -> float:
    """log of the explicit bound, safe for extreme gamma = 1/(p - q)."""
    from scipy.special import logsumexp

    log_a = np.asarray(log_a, dtype=float)
    q = np.asarray(q, dtype=float)
    gammas = 1.0 / (p - q)
    n = log_a.size
    return float(gammas.max() * np.log(n) + logsumexp(gammas * log_a))


def constraint_log_root(p: float, log_a, q) -> float:
    """y = log z of the point on the constraint boundary z^p = sum a_i z^(q_i).

    H(y) = p*y - logsumexp(log a_i + q_i y) is strictly increasing (q_i < p),
    so the root is unique; plain bisection after bracket expansion.
    """
    from scipy.special import logsumexp

    log_a = np.asarray(log_a, dtype=float)
    q = np.asarray(q, dtype=float)

    dq = p - q  # evaluate the defect as -logsumexp(log_a - dq*y): no cancellation

    def H(y):
        return -logsumexp(log_a - dq * y)

    lo, hi = -1.0, 1.0
    width = 1.0
    while H(hi) < 0:
        width *= 2.0
        hi += width
        if hi > 1e12:
            raise DomainError("constraint root bracket failed (above)")
    width = 1.0
    while H(lo) > 0:
        width *= 2.0
        lo -= width
        if lo < -1e12:
            raise DomainError("constraint root bracket failed (below)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if H(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _logsumexp_rows(x):
    m = x.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(x - m).sum(axis=1, keepdims=True)))[:, 0]


def _batch_constraint_log_root(p, log_a, q, iters=120):
    """Vectorized log-space bisection; log_a and q have shape (k, n)."""
    k = log_a.shape[0]
    dq = p - q  # defect as -logsumexp(log_a - dq*y) avoids p*y - q*y cancellation

    def H(y):
        return -_logsumexp_rows(log_a - dq * y[:, None])

    lo = np.full(k, -1.0)
    hi = np.full(k, 1.0)
    width = 1.0
    while True:
        bad = H(hi) < 0
        if not bad.any():
            break
        width *= 2.0
        hi[bad] += width
        if width > 1e12:
            raise DomainError("constraint root bracket failed (above)")
    width = 1.0
    while True:
        bad = H(lo) > 0
        if not bad.any():
            break
        width *= 2.0
        lo[bad] -= width
        if width > 1e12:
            raise DomainError("constraint root bracket failed (below)")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = H(mid) <= 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def check_serrin(p: float, n_trials: int = 100_000, seed: int = 1,
                 include_adversarial: bool = True):
    """Randomized counterexample search for the Serrin-type bound.

    Samples instances with N <= 5, log-uniform coefficients in [1e-6, 1e6]
    and exponents uniform in [0, p); z sits exactly on the constraint
    boundary.  Comparison happens in log space so near-boundary exponents
    (gamma blowing up) stay representable; equality cases are resolved to
    bisection precision, so a 1e-7 log-space slack separates real violations
    from roundoff.  Returns a report with any violations (expected none).
    """
    if n_trials < 10_000:
        raise DomainError("need at least 1e4 trials")
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, 6, size=n_trials)
    adversarial = include_adversarial & (np.arange(n_trials) % 10 == 0)
    violations = []
    worst_log_margin = np.inf
    for n in range(1, 6):
        sel = np.nonzero(sizes == n)[0]
        if sel.size == 0:
            continue
        log_a = rng.uniform(-6, 6, size=(sel.size, n)) * np.log(10.0)
        q = rng.uniform(0.0, p, size=(sel.size, n))
        q[adversarial[sel]] = p - 1e-6  # near-boundary exponents
        q = np.minimum(q, p * (1 - 1e-12))
        y = _batch_constraint_log_root(p, log_a, q)
        gammas = 1.0 / (p - q)
        log_bound = gammas.max(axis=1) * np.log(n) + _logsumexp_rows(gammas * log_a)
        margin = log_bound - y
        worst_log_margin = min(worst_log_margin, float(margin.min()))
        for i in np.nonzero(y > log_bound + 1e-7)[0]:
            violations.append({"trial": int(sel[i]), "log_z": float(y[i]),
                               "log_bound": float(log_bound[i]),
                               "log_a": log_a[i].tolist(), "q": q[i].tolist()})
    return {"n_trials": n_trials, "violations": violations,
            "worst_log_margin": float(worst_log_margin)}


# ---------------------------------------------------------------------------
# Iteration lemma with proof-constructed constants.
# ---------------------------------------------------------------------------

@dataclass
class IterationInstance:
    """Hypothesis data for the iteration lemma.

    phi must be nondecreasing on [0, R0] and satisfy
        phi(r) <= C1 [ (r/R)^alpha + mu ] phi(R) + C2 R^beta
    for all 0 < r <= R <= R0 (checked on a sample grid).
    """

    C1: float
    alpha: float
    beta: float
    C2: float = 0.0
    mu: float = 0.0
    sigma: float | None = None  # None -> beta
    R0: float = 1.0
    phi: Callable = None

    def __post_init__(self):
        if not (self.C1 > 0 and self.alpha > 0 and self.beta > 0):
            raise DomainError("C1, alpha, beta must be positive")
        if self.beta >= self.alpha:
            raise DomainError("need beta < alpha")
        if self.C2 < 0 or self.mu < 0:
            raise DomainError("C2 and mu must be nonnegative")
        if self.sigma is None:
            self.sigma = self.beta
        if self.sigma > self.beta:
            raise DomainError("need sigma <= beta")
        if not self.R0 > 0:
            raise DomainError("R0 must be positive")


def _grid(R0: float, n: int = 40):
    return R0 * np.logspace(-6, 0, n)


def check_hypothesis(inst: IterationInstance, n: int = 40) -> bool:
    """Verify the growth hypothesis of the lemma on a dense (r, R) grid."""
    rs = _grid(inst.R0, n)
    phi = np.array([inst.phi(r) for r in rs])
    if np.any(np.diff(phi) < -1e-12 * max(1.0, np.abs(phi).max())):
        return False
    ok = True
    for j, R in enumerate(rs):
        lhs = phi[: j + 1]
        rhs = inst.C1 * ((rs[: j + 1] / R) ** inst.alpha + inst.mu) * phi[j] \
            + inst.C2 * R ** inst.beta
        ok &= bool(np.all(lhs <= rhs * (1 + 1e-9) + 1e-300))
    return ok


def iterate_phi(inst: IterationInstance, n_grid: int = 40, grid=None,
                check_hyp: bool = True):
    """Run the iteration-lemma construction and verify its conclusions.

    theta solves 2*C1*theta^alpha = theta^delta with delta the midpoint of
    (beta, alpha); mu0 = theta^alpha / 2 (any value with mu0 < theta^alpha
    works).  C1 below 1 is raised to 1 first, which only weakens the
    hypothesis and keeps theta inside (0, 1).

    Returns theta, delta_exp, mu0, C3, C4 and a pass flag for the grid
    checks of both conclusions.
    """
    c1 = max(inst.C1, 1.0)
    delta = 0.5 * (inst.alpha + inst.beta)
    theta = (2.0 * c1) ** (-1.0 / (inst.alpha - delta))
    mu0 = theta ** inst.alpha / 2.0
    if inst.mu >= mu0:
        raise DomainError(f"mu={inst.mu:g} >= mu0={mu0:g}: hypothesis fails")
    if check_hyp and not check_hypothesis(inst, n_grid):
        raise DomainError("phi does not satisfy the growth hypothesis on the grid")

    b, s = inst.beta, inst.sigma
    geom = 1.0 / (theta ** b - theta ** delta)
    C3 = theta ** (-b) * max(1.0, geom)
    if s < b:
        # absorbing R^(beta - sigma) <= R0^(beta - sigma) costs an R0 factor
        C3 *= max(1.0, inst.R0 ** (b - s))
    phi_R0 = inst.phi(inst.R0)
    C4 = C3 * inst.R0 ** (-s) * (phi_R0 + inst.C2 * inst.R0 ** s)

    rs = _grid(inst.R0, n_grid) if grid is None else np.asarray(grid, dtype=float)
    rs = np.sort(rs)
    phi = np.array([inst.phi(r) for r in rs])
    ok = True
    for j, R in enumerate(rs):
        bound = C3 * (rs[: j + 1] / R) ** s * (phi[j] + inst.C2 * R ** s)
        ok &= bool(np.all(phi[: j + 1] <= bound * (1 + 1e-9) + 1e-300))
    ok &= bool(np.all(phi <= C4 * rs ** s * (1 + 1e-9) + 1e-300))
    return {"theta": float(theta), "delta_exp": float(delta), "mu0": float(mu0),
            "C3": float(C3), "C4": float(C4), "pass": bool(ok)}


def extremal_phi(inst: IterationInstance, theta: float, delta: float):
    """Worst-case phi: the one-step recursion run as an equality from phi(R0)=1.

    phi(theta^(n+1) R0) = theta^delta * phi(theta^n R0) + C2 (theta^n R0)^beta,
    extended to a nondecreasing step function.
    """
    scales = [inst.R0]
    values = [1.0]
    r = inst.R0
    while r > inst.R0 * 1e-7:
        v = theta ** delta * values[-1] + inst.C2 * r ** inst.beta
        r *= theta
        scales.append(r)
        values.append(v)
    scales = np.array(scales[::-1])
    values = np.array(values[::-1])

    def phi(r):
        if r <= 0:
            return float(values[0])
        i = np.searchsorted(scales, r, side="left")
        i = min(i, len(values) - 1)
        return float(values[i])

    return phi
