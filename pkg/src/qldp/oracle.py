"""Exact sample complexities for small instances.

Three independent routes:

* tensor powers: Helstrom error of ``rho^n`` vs ``sigma^n`` from a full
  eigendecomposition (any pair, ``d^n`` up to a cap);
* type enumeration: commuting pairs reduce to i.i.d. classical sampling, and
  the Bayes error is a sum over types of the likelihood-ratio classes;
* Neyman-Pearson: minimal type-II error at a type-I budget, exact on
  commuting pairs and from the concave dual otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .divergences import max_relative_entropy, state
from .errors import DimCapExceeded, RangeViolation
from .ldp import binary_mechanism
from .linalg import ORACLE_DIM_CAP, eigh, eigvalsh, positive_part_trace, tensor_power

TENSOR_EIG = "tensor_eig"
BINOMIAL_SCAN = "binomial_scan"
NEYMAN_PEARSON_SCAN = "neyman_pearson_scan"

COMMUTE_TOL = 1e-12
TYPE_CAP = 2_000_000
LINEAR_SCAN = 256
BINARY_N_CAP = 10**6
# an error equal to the target in exact arithmetic may round a few ulps above it
TARGET_RTOL = 1e-12


class CapExceeded(NamedTuple):
    n_max: int

    def __str__(self):
        return f"CapExceeded({self.n_max})"


@dataclass(frozen=True)
class OracleResult:
    n_star: int | CapExceeded
    error_trace: dict = field(default_factory=dict)
    method: str = TENSOR_EIG

    @property
    def found(self) -> bool:
        return not isinstance(self.n_star, CapExceeded)


def exact_bayes_error_n(rho, sigma, p: float, n: int, cap: int = ORACLE_DIM_CAP) -> float:
    """Helstrom error for n copies, ``p - Tr(p rho^n - (1-p) sigma^n)_+``."""
    rho, sigma = state(rho), state(sigma)
    a = tensor_power(rho.matrix, n, cap)
    b = tensor_power(sigma.matrix, n, cap)
    err = p - positive_part_trace(p * a - (1.0 - p) * b)
    return min(max(err, 0.0), min(p, 1.0 - p))


def commuting_spectra(rho, sigma, tol: float = COMMUTE_TOL):
    """Joint eigenvalues (p_i, q_i) when ``[rho, sigma] = 0``, else ``None``."""
    rho, sigma = state(rho), state(sigma)
    a, b = rho.matrix, sigma.matrix
    if np.max(np.abs(a @ b - b @ a)) > tol:
        return None
    # a generic combination has simple spectrum on each joint eigenspace
    u = eigh(a + math.pi * b).eigenvectors
    ps = np.real(np.einsum("ij,ik,kj->j", u.conj(), a, u))
    qs = np.real(np.einsum("ij,ik,kj->j", u.conj(), b, u))
    # reject if the basis fails to diagonalise either state
    for m, d in ((a, ps), (b, qs)):
        if np.max(np.abs(u.conj().T @ m @ u - np.diag(d))) > 1e-9:
            return None
    return np.clip(ps, 0.0, None), np.clip(qs, 0.0, None)


def _ratio_classes(ps, qs):
    """Merge outcomes sharing the same likelihood ratio (a sufficient statistic)."""
    classes: dict = {}
    for pi, qi in zip(ps, qs):
        if pi <= 0.0 and qi <= 0.0:
            continue
        key = math.inf if qi <= 0.0 else round(pi / qi, 12)
        cp, cq = classes.get(key, (0.0, 0.0))
        classes[key] = (cp + pi, cq + qi)
    vals = list(classes.values())
    return np.array([v[0] for v in vals]), np.array([v[1] for v in vals])


def _compositions(n: int, k: int) -> np.ndarray:
    if k == 1:
        return np.array([[n]])
    if k == 2:
        c = np.arange(n + 1)
        return np.stack([c, n - c], axis=1)
    count = math.comb(n + k - 1, k - 1)
    if count > TYPE_CAP:
        raise DimCapExceeded(count, TYPE_CAP)
    rows = []
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1, *bars, n + k - 1)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.array(rows)


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def type_log_probs(ps, qs, n: int):
    """Log-probabilities of every type under P^n and Q^n (ratio classes merged)."""
    cp, cq = _ratio_classes(np.asarray(ps, float), np.asarray(qs, float))
    counts = _compositions(n, len(cp))
    log_multi = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)

    def loglik(probs):
        lp = _safe_log(probs)
        with np.errstate(invalid="ignore"):
            terms = np.where(counts > 0, counts * lp[None, :], 0.0)
        return log_multi + terms.sum(axis=1)

    return loglik(cp), loglik(cq)


def classical_bayes_error(ps, qs, p: float, n: int) -> float:
    """Exact Bayes error for n i.i.d. samples from P (prior p) vs Q."""
    lp, lq = type_log_probs(ps, qs, n)
    a = math.log(p) + lp
    b = math.log(1.0 - p) + lq
    # all terms are nonnegative, so pairwise summation loses at most O(log n) ulps
    err = float(np.sum(np.exp(np.minimum(a, b))))
    return min(max(err, 0.0), min(p, 1.0 - p))


def _meets(err: float, target: float) -> bool:
    return err <= target * (1.0 + TARGET_RTOL)


def _check(p: float, delta: float):
    if not 0.0 < p < 1.0:
        raise RangeViolation(f"prior p must lie in (0,1), got {p}")
    if not delta > 0.0:
        raise RangeViolation(f"delta must be positive, got {delta}")


def quantum_sample_complexity(rho, sigma, p: float, delta: float, n_max: int,
                              cap: int = ORACLE_DIM_CAP, method: str = "auto") -> OracleResult:
    """Least n with Helstrom error at most delta, by linear scan.

    ``method="tensor"`` builds ``rho^n`` explicitly (``d^n <= cap``);
    ``"types"`` requires a commuting pair and sums over likelihood-ratio
    types. ``"auto"`` uses types for commuting pairs and tensors otherwise.
    Running past a cap ends the scan with ``CapExceeded``.
    """
    _check(p, delta)
    rho, sigma = state(rho), state(sigma)
    joint = commuting_spectra(rho, sigma) if method in ("auto", "types") else None
    if method == "types" and joint is None:
        raise RangeViolation("the type route needs commuting states")
    use_types = joint is not None
    tag = BINOMIAL_SCAN if use_types else TENSOR_EIG
    trace = {}
    for n in range(1, n_max + 1):
        try:
            if use_types:
                err = classical_bayes_error(*joint, p, n)
            else:
                err = exact_bayes_error_n(rho, sigma, p, n, cap)
        except DimCapExceeded:
            return OracleResult(CapExceeded(n - 1), trace, tag)
        trace[n] = err
        if _meets(err, delta):
            return OracleResult(n, trace, tag)
    return OracleResult(CapExceeded(n_max), trace, tag)


def binary_bayes_error(P, Q, p: float, n: int) -> float:
    """Bayes error for n i.i.d. binary samples, summed in log space."""
    k = np.arange(n + 1)
    a = math.log(p) + _binom_logpmf(k, n, float(P[0]))
    b = math.log(1.0 - p) + _binom_logpmf(k, n, float(Q[0]))
    # all terms are nonnegative, so pairwise summation loses at most O(log n) ulps
    err = float(np.sum(np.exp(np.minimum(a, b))))
    return min(max(err, 0.0), min(p, 1.0 - p))


def _binom_logpmf(k: np.ndarray, n: int, prob: float) -> np.ndarray:
    log_c = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(k > 0, k * math.log(prob), 0.0) if prob > 0 else np.where(k > 0, -np.inf, 0.0)
        lq = (np.where(n - k > 0, (n - k) * math.log1p(-prob), 0.0) if prob < 1
              else np.where(n - k > 0, -np.inf, 0.0))
    return log_c + lp + lq


def binary_sample_complexity(P, Q, p: float, delta: float, n_max: int = BINARY_N_CAP) -> OracleResult:
    """Least n with binary Bayes error at most delta.

    Linear scan up to ``LINEAR_SCAN``; beyond that the search gallops and
    bisects, which is exact because the Bayes error of i.i.d. samples is
    nonincreasing in n (extra samples may be ignored).
    """
    _check(p, delta)
    if n_max > BINARY_N_CAP:
        raise RangeViolation(f"n_max must be at most {BINARY_N_CAP}")
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    trace = {}

    def err(n):
        if n not in trace:
            trace[n] = binary_bayes_error(P, Q, p, n)
        return trace[n]

    for n in range(1, min(n_max, LINEAR_SCAN) + 1):
        if _meets(err(n), delta):
            return OracleResult(n, trace, BINOMIAL_SCAN)
    if n_max <= LINEAR_SCAN:
        return OracleResult(CapExceeded(n_max), trace, BINOMIAL_SCAN)
    lo, hi = LINEAR_SCAN, LINEAR_SCAN
    while True:
        hi = min(2 * hi, n_max)
        if _meets(err(hi), delta):
            break
        if hi == n_max:
            return OracleResult(CapExceeded(n_max), dict(sorted(trace.items())), BINOMIAL_SCAN)
        lo = hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _meets(err(mid), delta):
            hi = mid
        else:
            lo = mid
    return OracleResult(hi, dict(sorted(trace.items())), BINOMIAL_SCAN)


def ldp_witness(rho, sigma, p: float, delta: float, epsilon: float, n_max: int = BINARY_N_CAP) -> OracleResult:
    """Sample size achieved by the binary mechanism: an upper witness under eps-LDP."""
    mech = binary_mechanism(rho, sigma, epsilon)
    return binary_sample_complexity(mech.out_p, mech.out_q, p, delta, n_max)


def classical_np_type2(ps, qs, alpha: float, n: int) -> float:
    """Minimal type-II error Q^n(T) subject to P^n(not T) <= alpha, with randomisation."""
    lp, lq = type_log_probs(ps, qs, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = lp - lq
    order = np.argsort(-ratio, kind="stable")
    pp = np.exp(lp[order])
    qq = np.exp(lq[order])
    need = 1.0 - alpha
    got = 0.0
    type2 = []
    for a, b in zip(pp, qq):
        if got >= need:
            break
        if a <= 0.0:
            # types impossible under P never help meet the budget
            continue
        take = min(1.0, (need - got) / a)
        got += take * a
        type2.append(take * b)
    return min(max(math.fsum(type2), 0.0), 1.0)


def quantum_np_type2(rho_n: np.ndarray, sigma_n: np.ndarray, alpha: float, log_t_range=(-50.0, 50.0)) -> float:
    """Minimal type-II error at type-I budget alpha for a pair of matrices.

    The dual ``sup_t t(1-alpha) - Tr(t rho - sigma)_+`` is maximised over
    ``log t``; at the maximiser the test ``{t rho > sigma}`` plus a
    randomised share of the near-null eigenspace is feasible and attains
    the optimum, and its type-II error is returned. If that test misses
    the budget the dual value is returned instead.
    """
    if alpha >= 1.0:
        return 0.0

    def neg_dual(log_t):
        t = math.exp(log_t)
        w = eigvalsh(t * rho_n - sigma_n)
        return -(t * (1.0 - alpha) - float(np.sum(w[w > 0.0])))

    lo, hi = log_t_range
    res = minimize_scalar(neg_dual, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    dual = min(max(-float(res.fun), 0.0), 1.0)
    t = math.exp(float(res.x))
    w, v = eigh(t * rho_n - sigma_n, method="lapack" if rho_n.shape[0] > 16 else "auto")
    tau = 1e-8 * max(1.0, t)
    pos, null = v[:, w > tau], v[:, np.abs(w) <= tau]

    def mass(m, basis):
        return float(np.real(np.einsum("ij,ik,kj->", basis.conj(), m, basis))) if basis.shape[1] else 0.0

    need = 1.0 - alpha - mass(rho_n, pos)
    frac = 0.0
    if need > 0.0:
        avail = mass(rho_n, null)
        if avail <= 0.0 or need > avail * (1.0 + 1e-12):
            return dual
        frac = min(1.0, need / avail)
    primal = mass(sigma_n, pos) + frac * mass(sigma_n, null)
    return min(max(primal, 0.0), 1.0)


def neyman_pearson_scan(rho, sigma, alpha: float, beta: float, n_max: int,
                        cap: int = ORACLE_DIM_CAP) -> OracleResult:
    """Least n with a test of type-I error <= alpha and type-II error <= beta.

    ``error_trace`` maps n to the minimal type-II error at type-I budget alpha.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise RangeViolation("alpha and beta must lie in (0, 1)")
    rho, sigma = state(rho), state(sigma)
    joint = commuting_spectra(rho, sigma)
    trace = {}
    if joint is None:
        if rho.dim**n_max > cap:
            raise DimCapExceeded(rho.dim**n_max, cap)
        d_fwd = max_relative_entropy(rho, sigma).value
        d_bwd = max_relative_entropy(sigma, rho).value
    for n in range(1, n_max + 1):
        if joint is not None:
            err = classical_np_type2(*joint, alpha, n)
        else:
            lo = max(-n * d_fwd - 1.0, -50.0) if math.isfinite(d_fwd) else -50.0
            hi = min(n * d_bwd + 1.0, 50.0) if math.isfinite(d_bwd) else 50.0
            err = quantum_np_type2(tensor_power(rho.matrix, n, cap), tensor_power(sigma.matrix, n, cap),
                                   alpha, (lo, hi))
        trace[n] = err
        if _meets(err, beta):
            return OracleResult(n, trace, NEYMAN_PEARSON_SCAN)
    return OracleResult(CapExceeded(n_max), trace, NEYMAN_PEARSON_SCAN)
