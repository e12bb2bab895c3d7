"""Quantum divergences between density matrices.

Closed forms are used wherever they exist. The integral Hellinger/Renyi
family and general f-divergences are evaluated from hockey-stick
divergences ``E_gamma(rho||sigma) = Tr(rho - gamma sigma)_+`` by adaptive
quadrature in ``t = log(gamma)``, truncated at the max-relative entropy
beyond which ``E_gamma`` vanishes identically.

All logarithms are natural. Support violations yield ``inf`` rather than
an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import AlphaOutOfRange, DimensionMismatch
from .linalg import (
    DensityMatrix,
    as_matrix,
    eigh,
    positive_part_trace,
    spectral_function,
    support_mask,
)
from .quadrature import QuadratureConfig, integrate

SUPPORT_TOL = 1e-10
JS_NOISE = 64 * np.finfo(float).eps

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    abs_error_estimate: float = 0.0
    method: str = CLOSED_FORM

    def __float__(self):
        return float(self.value)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def state(x) -> DensityMatrix:
    """Coerce a matrix, probability vector or state into a :class:`DensityMatrix`."""
    return x if isinstance(x, DensityMatrix) else DensityMatrix(as_matrix(x))


def _pair(rho, sigma):
    rho, sigma = state(rho), state(sigma)
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")
    return rho, sigma


def _kernel_leak(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Weight of ``rho`` outside the support of ``sigma``."""
    w, u = sigma.eig
    ker = u[:, ~support_mask(w)]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.real(np.einsum("ij,ik,kj->", ker.conj(), rho.matrix, ker)))


def support_contained(rho, sigma) -> bool:
    rho, sigma = _pair(rho, sigma)
    return _kernel_leak(rho, sigma) <= SUPPORT_TOL


def _inv_sqrt(sigma: DensityMatrix) -> np.ndarray:
    return spectral_function(sigma.eig, lambda x: x**-0.5)


def _relative_spectrum(rho: DensityMatrix, sigma: DensityMatrix) -> np.ndarray:
    """Eigenvalues of sigma^{-1/2} rho sigma^{-1/2} on the support of sigma."""
    s = _inv_sqrt(sigma)
    return eigh(s @ rho.matrix @ s).eigenvalues


def hockey_stick(rho, sigma, gamma: float) -> DivergenceValue:
    """``E_gamma(rho||sigma) = Tr(rho - gamma sigma)_+``."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    rho, sigma = _pair(rho, sigma)
    return DivergenceValue(positive_part_trace(rho.matrix - gamma * sigma.matrix))


def trace_distance(rho, sigma) -> float:
    return float(hockey_stick(rho, sigma, 1.0).value)


def fidelity(rho, sigma) -> DivergenceValue:
    """``F = ||sqrt(rho) sqrt(sigma)||_1``, computed as Tr sqrt(sqrt(rho) sigma sqrt(rho))."""
    rho, sigma = _pair(rho, sigma)
    r = spectral_function(rho.eig, np.sqrt)
    w = eigh(r @ sigma.matrix @ r).eigenvalues
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    return DivergenceValue(min(max(f, 0.0), 1.0))


def bures_distance(rho, sigma) -> DivergenceValue:
    return DivergenceValue(math.sqrt(max(1.0 - fidelity(rho, sigma).value, 0.0)))


def max_relative_entropy(rho, sigma) -> DivergenceValue:
    rho, sigma = _pair(rho, sigma)
    if _kernel_leak(rho, sigma) > SUPPORT_TOL:
        return DivergenceValue(math.inf)
    lam = float(_relative_spectrum(rho, sigma)[0])
    return DivergenceValue(max(math.log(lam), 0.0) if lam > 0 else math.inf)


class PetzQuantities(NamedTuple):
    Q: float
    D: float
    H: float


def _log_ratio(q: float, alpha: float) -> float:
    if q <= 0.0:
        return math.inf
    return math.log(q) / (alpha - 1.0)


def petz_quantities(rho, sigma, alpha: float) -> PetzQuantities:
    """Petz quasi-entropy ``Tr(rho^a sigma^(1-a))`` with its Renyi and Hellinger forms."""
    if not (0.0 < alpha < 1.0 or 1.0 < alpha <= 2.0):
        raise AlphaOutOfRange(f"Petz alpha must lie in (0,1) or (1,2], got {alpha}")
    rho, sigma = _pair(rho, sigma)
    if alpha > 1.0 and _kernel_leak(rho, sigma) > SUPPORT_TOL:
        return PetzQuantities(math.inf, math.inf, math.inf)
    ra = spectral_function(rho.eig, lambda x: x**alpha)
    sb = spectral_function(sigma.eig, lambda x: x ** (1.0 - alpha))
    q = max(float(np.real(np.trace(ra @ sb))), 0.0)
    return PetzQuantities(q, _log_ratio(q, alpha), (q - 1.0) / (alpha - 1.0))


def sandwiched_renyi(rho, sigma, alpha: float) -> DivergenceValue:
    if not (0.5 <= alpha < 1.0 or alpha > 1.0):
        raise AlphaOutOfRange(f"sandwiched alpha must lie in [1/2,1) or (1,inf), got {alpha}")
    rho, sigma = _pair(rho, sigma)
    if alpha > 1.0 and _kernel_leak(rho, sigma) > SUPPORT_TOL:
        return DivergenceValue(math.inf)
    expo = (1.0 - alpha) / (2.0 * alpha)
    s = spectral_function(sigma.eig, lambda x: x**expo)
    w = eigh(s @ rho.matrix @ s).eigenvalues
    q = float(np.sum(np.clip(w, 0.0, None) ** alpha))
    return DivergenceValue(max(_log_ratio(q, alpha), 0.0))


def _pencil_roots(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Finite positive ``g`` with ``det(a - g b) = 0``, descending."""
    with np.errstate(all="ignore"):
        g = scipy.linalg.eigvals(a, b)
    g = g[np.isfinite(g)]
    g = g.real[(np.abs(g.imag) <= 1e-8 * np.maximum(1.0, np.abs(g.real))) & (g.real > 0)]
    return np.sort(g)[::-1]


class HockeyStickProfile:
    """``gamma -> E_gamma(rho||sigma)`` with batched evaluation and memoisation.

    Kinks of the profile sit at the generalized eigenvalues of the pencil
    (rho, sigma); they are exposed as ``kinks`` for the quadrature.
    """

    def __init__(self, rho: DensityMatrix, sigma: DensityMatrix):
        self.rho = rho.matrix
        self.sigma = sigma.matrix
        self._cache: dict[float, float] = {}
        self.leak = _kernel_leak(rho, sigma)
        self.kinks = _pencil_roots(self.rho, self.sigma)
        if self.leak > SUPPORT_TOL:
            self.dmax = math.inf
        else:
            lam = float(_relative_spectrum(rho, sigma)[0])
            self.dmax = max(math.log(lam), 0.0) if lam > 0 else math.inf
        self._schur = None
        w, u = sigma.eig
        keep = support_mask(w)
        if self.leak > SUPPORT_TOL and keep.any():
            r = u.conj().T @ self.rho @ u
            sig = w[keep]
            r_ss = r[np.ix_(keep, keep)]
            s = sig**-0.5
            top = float(np.linalg.eigvalsh(s[:, None] * r_ss * s[None, :])[-1])
            self._schur = (sig, r_ss, r[np.ix_(keep, ~keep)], r[np.ix_(~keep, ~keep)])
            self._schur_from = 2.0 * max(top, 1.0)

    def _far_tail(self, gammas: np.ndarray) -> np.ndarray:
        # Beyond every kink the support block of rho - gamma sigma is negative
        # definite; positive eigenvalues are fixed points of the Schur complement
        # lam = eig(r_kk + r_ks (gamma sig - r_ss + lam)^-1 r_sk), which avoids the
        # gamma * eps error of a direct eigensolve. Iterated for all gammas at once.
        sig, r_ss, r_sk, r_kk = self._schur
        base = gammas[:, None, None] * np.diag(sig)[None] - r_ss[None]
        eye = np.eye(len(sig))

        def schur(lam):
            t = r_kk[None] + r_sk.conj().T[None] @ np.linalg.solve(base + lam[:, None, None] * eye, r_sk[None])
            return np.linalg.eigvalsh((t + np.swapaxes(t.conj(), 1, 2)) / 2)[:, ::-1]

        start = schur(np.zeros(len(gammas)))
        total = np.zeros(len(gammas))
        for i in range(start.shape[1]):
            lam = start[:, i].copy()
            live = lam > 0.0
            if not live.any():
                break
            for _ in range(100):
                nxt = schur(lam)[:, i]
                moving = np.abs(nxt - lam) > 1e-15 * np.maximum(1.0, np.abs(lam))
                lam = np.where(live, nxt, lam)
                if not (moving & live).any():
                    break
            total += np.where(live, np.maximum(lam, 0.0), 0.0)
        return total

    def __call__(self, gammas) -> np.ndarray:
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        todo = [g for g in dict.fromkeys(gammas.tolist()) if g not in self._cache]
        if self._schur is not None:
            far = [g for g in todo if g > self._schur_from]
            if far:
                self._cache.update(zip(far, self._far_tail(np.asarray(far)).tolist()))
            todo = [g for g in todo if g <= self._schur_from]
        if todo:
            stack = self.rho[None, :, :] - np.asarray(todo)[:, None, None] * self.sigma[None, :, :]
            w = np.linalg.eigvalsh(stack)
            vals = np.where(w > 0.0, w, 0.0).sum(axis=1)
            self._cache.update(zip(todo, vals.tolist()))
        return np.array([self._cache[g] for g in gammas.tolist()])


def _log_kinks(profile: HockeyStickProfile, upper: float):
    ks = profile.kinks[profile.kinks > 1.0]
    return [math.log(k) for k in ks if math.log(k) < upper]


def _profile_integral(weight, profile, cfg, tail_bound=None):
    """``int_0^T weight(t) E_{e^t} dt`` with T the max-relative entropy.

    For an unbounded support the range is extended until the remaining
    weight mass (``E <= 1``) drops below ``abs_tol``; ``tail_bound(L)`` gives
    that mass analytically when known. Returns (value, error) or
    (inf, 0) when the tail does not vanish.
    """
    f = lambda t: weight(t) * profile(np.exp(t))
    if math.isfinite(profile.dmax):
        if profile.dmax <= 0.0:
            return 0.0, 0.0
        return integrate(f, 0.0, profile.dmax, cfg, _log_kinks(profile, profile.dmax))
    if tail_bound is not None:
        lo, hi = 1.0, 1.0
        while tail_bound(hi) > cfg.abs_tol:
            hi *= 2.0
            if hi > 700.0:
                return math.inf, 0.0
        val, err = integrate(f, 0.0, hi, cfg, _log_kinks(profile, hi))
        return val, err + tail_bound(hi)
    val, err = integrate(f, 0.0, 32.0, cfg, _log_kinks(profile, 32.0))
    lo = 32.0
    while True:
        hi = 2.0 * lo
        if hi > 700.0:
            return math.inf, 0.0
        mass, _ = integrate(weight, lo, hi, cfg)
        piece, perr = integrate(f, lo, hi, cfg)
        val += piece
        err += perr
        if mass <= cfg.abs_tol:
            return val, err + mass
        lo = hi


class IntegralHellinger(NamedTuple):
    H: DivergenceValue
    D: DivergenceValue


def integral_hellinger(rho, sigma, alpha: float, cfg: QuadratureConfig | None = None) -> IntegralHellinger:
    """Hellinger divergence from the hockey-stick integral and its Renyi form.

    ``H_a = a * int_1^inf (g^(a-2) E_g(rho||sigma) + g^(-a-1) E_g(sigma||rho)) dg``
    and ``D_a = log(1 + (a-1) H_a) / (a-1)``.
    """
    if not (0.0 < alpha < 1.0 or alpha > 1.0):
        raise AlphaOutOfRange(f"alpha must lie in (0,1) or (1,inf), got {alpha}")
    cfg = cfg or QuadratureConfig()
    rho, sigma = _pair(rho, sigma)
    fwd = HockeyStickProfile(rho, sigma)
    bwd = HockeyStickProfile(sigma, rho)
    if alpha > 1.0 and not math.isfinite(fwd.dmax):
        inf = DivergenceValue(math.inf, 0.0, QUADRATURE)
        return IntegralHellinger(inf, inf)
    sub = QuadratureConfig(cfg.rel_tol, cfg.abs_tol / (2.0 * alpha), cfg.max_subdivisions)
    a1 = 1.0 - alpha
    i1, e1 = _profile_integral(
        lambda t: np.exp(-a1 * t), fwd, sub,
        tail_bound=(lambda L: math.exp(-a1 * L) / a1) if alpha < 1.0 else None,
    )
    i2, e2 = _profile_integral(
        lambda t: np.exp(-alpha * t), bwd, sub,
        tail_bound=lambda L: math.exp(-alpha * L) / alpha,
    )
    h = alpha * (i1 + i2)
    herr = alpha * (e1 + e2)
    arg = 1.0 + (alpha - 1.0) * h
    if arg <= 0.0 or not math.isfinite(h):
        d = DivergenceValue(math.inf, 0.0, QUADRATURE)
    else:
        d = DivergenceValue(max(math.log(arg) / (alpha - 1.0), 0.0), herr / arg, QUADRATURE)
    return IntegralHellinger(DivergenceValue(max(h, 0.0), herr, QUADRATURE), d)


def f_divergence_integral(fpp: Callable, rho, sigma, cfg: QuadratureConfig | None = None) -> DivergenceValue:
    """f-divergence from the second derivative ``fpp`` of its generator.

    ``D_f = int_1^inf (f''(g) E_g(rho||sigma) + g^-3 f''(1/g) E_g(sigma||rho)) dg``;
    ``fpp`` must accept numpy arrays.
    """
    cfg = cfg or QuadratureConfig()
    rho, sigma = _pair(rho, sigma)
    fwd = HockeyStickProfile(rho, sigma)
    bwd = HockeyStickProfile(sigma, rho)
    sub = QuadratureConfig(cfg.rel_tol, cfg.abs_tol / 2.0, cfg.max_subdivisions)
    i1, e1 = _profile_integral(lambda t: np.exp(t) * fpp(np.exp(t)), fwd, sub)
    if not math.isfinite(i1):
        return DivergenceValue(math.inf, 0.0, QUADRATURE)
    i2, e2 = _profile_integral(lambda t: np.exp(-2.0 * t) * fpp(np.exp(-t)), bwd, sub)
    return DivergenceValue(max(i1 + i2, 0.0), e1 + e2, QUADRATURE)


def chi_squared(rho, sigma) -> DivergenceValue:
    """chi^2 with the logarithmic-mean kernel in sigma's eigenbasis.

    Equals ``int_0^inf Tr[(rho-sigma)(sigma+s)^-1 (rho-sigma)(sigma+s)^-1] ds``.
    """
    rho, sigma = _pair(rho, sigma)
    if _kernel_leak(rho, sigma) > SUPPORT_TOL:
        return DivergenceValue(math.inf)
    w, u = sigma.eig
    keep = support_mask(w)
    p = w[keep]
    uk = u[:, keep]
    delta = uk.conj().T @ (rho.matrix - sigma.matrix) @ uk
    pi, pj = p[:, None], p[None, :]
    diff = pi - pj
    close = np.abs(diff) <= 1e-12 * np.maximum(pi, pj)
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = np.where(close, 2.0 / (pi + pj), np.log(pi / pj) / diff)
    return DivergenceValue(max(float(np.sum(np.abs(delta) ** 2 * kernel)), 0.0))


def von_neumann_entropy(rho) -> float:
    w = state(rho).eig.eigenvalues
    w = w[support_mask(w)]
    return float(-np.sum(w * np.log(w)))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)


def relative_entropy(rho, sigma) -> DivergenceValue:
    """Umegaki relative entropy ``Tr rho (log rho - log sigma)``."""
    rho, sigma = _pair(rho, sigma)
    if _kernel_leak(rho, sigma) > SUPPORT_TOL:
        return DivergenceValue(math.inf)
    log_sigma = spectral_function(sigma.eig, np.log)
    cross = float(np.real(np.trace(rho.matrix @ log_sigma)))
    return DivergenceValue(max(-von_neumann_entropy(rho) - cross, 0.0))


def jensen_shannon(rho, sigma, p: float) -> DivergenceValue:
    """``JS_p = p D(rho||M) + (1-p) D(sigma||M)`` with ``M = p rho + (1-p) sigma``.

    Evaluated as the Holevo quantity ``S(M) - p S(rho) - (1-p) S(sigma)``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("prior p must lie in (0, 1)")
    rho, sigma = _pair(rho, sigma)
    mix = DensityMatrix(p * rho.matrix + (1.0 - p) * sigma.matrix)
    s_mix = von_neumann_entropy(mix)
    js = s_mix - p * von_neumann_entropy(rho) - (1.0 - p) * von_neumann_entropy(sigma)
    # a difference of entropies cannot resolve values below a few ulps of S(M)
    if js <= JS_NOISE * (1.0 + s_mix):
        js = 0.0
    return DivergenceValue(min(js, binary_entropy(p)))
