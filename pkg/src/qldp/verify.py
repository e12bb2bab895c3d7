"""Named property checks run by ``qldp verify``.

Each check draws its own cases from a seeded generator, counts failures and
reports the worst violation it saw (positive means violated).  Checks look up
library functions and constants through their modules at call time, so a
patched constant shows up as a named failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds, divergences, ldp, linalg, oracle


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    failures: int
    worst: float  # largest observed violation (lhs - rhs - slack); <= 0 when passing
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.cases > 0


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 0
    trials: int = 20


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.failures = 0
        self.worst = -math.inf
        self.first = ""

    def le(self, lhs: float, rhs: float, slack: float, what: str = ""):
        """Record one inequality ``lhs <= rhs + slack``."""
        self.cases += 1
        gap = lhs - rhs - slack
        if math.isnan(gap):
            gap = math.inf
        self.worst = max(self.worst, gap)
        if gap > 0:
            self.failures += 1
            if not self.first:
                self.first = f"{what}: {lhs!r} > {rhs!r} + {slack:g}"

    def close(self, a: float, b: float, tol: float, what: str = ""):
        self.le(abs(a - b), 0.0, tol, what)

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.cases, self.failures, self.worst, self.first)


REGISTRY: dict[str, Callable[[int, np.random.Generator], CheckResult]] = {}


def check(name: str):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


def _pair(rng, dims=(2, 3, 4, 5, 6), full_rank=False):
    d = int(rng.choice(dims))
    ranks = (None, None) if full_rank else tuple(int(rng.integers(1, d + 1)) for _ in range(2))
    return linalg.random_density(d, ranks[0], rng), linalg.random_density(d, ranks[1], rng)


def _commuting_pair(rng, dim=2, lo=0.02):
    u = linalg.haar_unitary(dim, rng)
    ps = rng.dirichlet(np.ones(dim)) * (1 - dim * lo) + lo
    qs = rng.dirichlet(np.ones(dim)) * (1 - dim * lo) + lo
    rho = u @ np.diag(ps) @ u.conj().T
    sigma = u @ np.diag(qs) @ u.conj().T
    return linalg.DensityMatrix(rho), linalg.DensityMatrix(sigma), ps, qs


# hermitian-core

@check("eigh_reconstruction")
def _eigh_reconstruction(trials, rng):
    t = _Tally("eigh_reconstruction")
    for _ in range(trials * 5):
        d = int(rng.integers(2, 17))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (a + a.conj().T) / 2
        dec = linalg.eigh(h)
        t.le(float(np.max(np.abs(dec.reconstruct() - h))), 0.0, 1e-10, f"dim {d}")
    return t.result()


@check("trace_norm_split")
def _trace_norm_split(trials, rng):
    t = _Tally("trace_norm_split")
    for _ in range(trials * 5):
        d = int(rng.integers(2, 9))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (a + a.conj().T) / 2
        total = linalg.positive_part_trace(h) + linalg.positive_part_trace(-h)
        t.close(total, float(np.sum(np.abs(np.linalg.eigvalsh(h)))), 1e-10, f"dim {d}")
    return t.result()


@check("tensor_power_spectrum")
def _tensor_power_spectrum(trials, rng):
    t = _Tally("tensor_power_spectrum")
    for _ in range(max(1, trials // 2)):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(2, 5))
        rho = linalg.random_density(d, None, rng)
        got = np.sort(linalg.eigvalsh(linalg.tensor_power(rho.matrix, n)))
        base = rho.eig.eigenvalues
        prods = base
        for _ in range(n - 1):
            prods = np.outer(prods, base).ravel()
        t.le(float(np.max(np.abs(got - np.sort(prods)))), 0.0, 1e-9, f"dim {d}, n {n}")
    return t.result()


# divergences

@check("fvdg_chain")
def _fvdg_chain(trials, rng):
    t = _Tally("fvdg_chain")
    for _ in range(trials * 5):
        rho, sigma = _pair(rng)
        f = divergences.fidelity(rho, sigma).value
        h = divergences.integral_hellinger(rho, sigma, 0.5).H.value
        e1 = divergences.trace_distance(rho, sigma)
        chain = [1 - f, 0.5 * h, e1, math.sqrt(max(0.0, 1 - f * f)), math.sqrt(h)]
        for k in range(4):
            t.le(chain[k], chain[k + 1], 1e-7, f"link {k}")
    return t.result()


def _dp_values(rho, sigma):
    """Divergences that data processing cannot increase (fidelity enters negated)."""
    out = {
        "E_1": (divergences.hockey_stick(rho, sigma, 1.0).value, 0.0),
        "E_2": (divergences.hockey_stick(rho, sigma, 2.0).value, 0.0),
        "-fidelity": (-divergences.fidelity(rho, sigma).value, 0.0),
        "bures": (divergences.bures_distance(rho, sigma).value, 0.0),
        "relative_entropy": (divergences.relative_entropy(rho, sigma).value, 0.0),
        "chi2": (divergences.chi_squared(rho, sigma).value, 0.0),
        "js_half": (divergences.jensen_shannon(rho, sigma, 0.5).value, 0.0),
        "d_max": (divergences.max_relative_entropy(rho, sigma).value, 0.0),
        "sandwiched_2": (divergences.sandwiched_renyi(rho, sigma, 2.0).value, 0.0),
        "petz_half": (divergences.petz_quantities(rho, sigma, 0.5).D, 0.0),
    }
    ih = divergences.integral_hellinger(rho, sigma, 0.5).H
    out["hellinger_half"] = (ih.value, ih.abs_error_estimate)
    return out


@check("data_processing_mechanism")
def _data_processing(trials, rng):
    t = _Tally("data_processing_mechanism")
    for _ in range(trials):
        rho, sigma = _pair(rng, dims=(2, 3, 4), full_rank=True)
        eps = float(rng.choice([0.1, math.log(2), math.log(3), 2.0]))
        mech = ldp.binary_mechanism(rho, sigma, eps)
        before = _dp_values(rho, sigma)
        after = _dp_values(mech.out_p, mech.out_q)
        for key, (val, err) in after.items():
            ref, ref_err = before[key]
            if math.isinf(ref) and ref > 0:
                continue
            t.le(val, ref, 1e-9 + err + ref_err, key)
    return t.result()


@check("js_subadditivity")
def _js_subadditivity(trials, rng):
    t = _Tally("js_subadditivity")
    for _ in range(trials):
        rho, sigma = _pair(rng, dims=(2,))
        p = float(rng.uniform(0.1, 0.9))
        js1 = divergences.jensen_shannon(rho, sigma, p).value
        for n in (2, 3):
            jsn = divergences.jensen_shannon(linalg.tensor_power(rho.matrix, n),
                                             linalg.tensor_power(sigma.matrix, n), p).value
            t.le(jsn, n * js1, 1e-8, f"n {n}")
    return t.result()


@check("js_hellinger_lemma")
def _js_hellinger_lemma(trials, rng):
    t = _Tally("js_hellinger_lemma")
    grid = (0.1, 0.25, 0.5)
    for _ in range(max(1, trials // 2)):
        rho, sigma = _pair(rng, dims=(2, 3, 4))
        hell = {lam: divergences.integral_hellinger(rho, sigma, 1 - lam) for lam in grid}
        for a in grid:
            js = divergences.jensen_shannon(rho, sigma, a).value
            for lam in grid:
                c = bounds.js_hellinger_constant(a, lam)
                t.le(js, c * hell[lam].H.value, 1e-7, f"alpha {a}, lambda {lam}")
    return t.result()


@check("js_hellinger_corollary")
def _js_hellinger_corollary(trials, rng):
    t = _Tally("js_hellinger_corollary")
    for a in np.linspace(0.01, 0.5, max(3, trials)):
        a = float(a)
        t.close(bounds.js_hellinger_corollary_constant(a), a * math.sqrt(2.0), 1e-12, f"alpha {a}")
        # the lemma constant at the same lambda is dominated by the corollary one
        t.le(bounds.js_hellinger_constant(a, bounds.prior_lambda(a)), a * math.sqrt(2.0), 1e-12,
             f"alpha {a} via lemma")
        t.close(bounds.legacy_improvement_factor(a), 32 * math.sqrt(2.0), 1e-9, f"improvement at {a}")
    return t.result()


@check("commuting_quadrature")
def _commuting_quadrature(trials, rng):
    t = _Tally("commuting_quadrature")
    for _ in range(trials * 2):
        rho, sigma, ps, qs = _commuting_pair(rng, int(rng.integers(2, 5)))
        classical = 2.0 * (1.0 - float(np.sum(np.sqrt(ps * qs))))
        t.close(divergences.integral_hellinger(rho, sigma, 0.5).H.value, classical, 1e-6, "H_1/2")
        chi2 = float(np.sum(ps * ps / qs) - 1.0)
        t.close(divergences.integral_hellinger(rho, sigma, 2.0).H.value, chi2, 1e-6 * max(1.0, chi2), "H_2")
    return t.result()


@check("chi2_three_routes")
def _chi2_routes(trials, rng):
    t = _Tally("chi2_three_routes")
    for _ in range(trials):
        rho, sigma = _pair(rng, dims=(2, 3, 4), full_rank=True)
        closed = divergences.chi_squared(rho, sigma).value
        quad = divergences.integral_hellinger(rho, sigma, 2.0).H.value
        fpp = divergences.f_divergence_integral(lambda x: 2.0, rho, sigma).value
        scale = max(1.0, closed)
        t.close(quad, closed, 1e-6 * scale, "H_2 vs closed form")
        t.close(fpp, closed, 1e-6 * scale, "f'' route vs closed form")
    return t.result()


@check("sandwiched_half_fidelity")
def _sandwiched_half(trials, rng):
    t = _Tally("sandwiched_half_fidelity")
    for _ in range(trials):
        rho, sigma = _pair(rng, full_rank=True)
        f = divergences.fidelity(rho, sigma).value
        t.close(divergences.sandwiched_renyi(rho, sigma, 0.5).value, -2.0 * math.log(f), 1e-8, "alpha 1/2")
    return t.result()


# ldp

EPS_GRID = (0.1, math.log(2.0), math.log(3.0), 2.0)


@check("mechanism_identity")
def _mechanism_identity(trials, rng):
    t = _Tally("mechanism_identity")
    for _ in range(trials * 5):
        rho, sigma = _pair(rng, dims=(2, 3))
        e1 = divergences.trace_distance(rho, sigma)
        for eps in EPS_GRID:
            mech = ldp.binary_mechanism(rho, sigma, eps)
            out = 0.5 * float(np.sum(np.abs(mech.out_p - mech.out_q)))
            factor = (math.exp(eps) - 1) / (math.exp(eps) + 1)
            t.close(out, factor * e1, 1e-12, f"eps {eps:.4g}")
            t.close(ldp.verify_ldp(mech.channel, eps).margin, 0.0, 1e-10, f"margin at eps {eps:.4g}")
    return t.result()


def _sup_e1(eps):
    g = math.exp(eps)
    return math.exp(-eps) * (g - 1) ** 2 / (g - 1 / g)


@check("eta_trace_cap")
def _eta_trace_cap(trials, rng):
    t = _Tally("eta_trace_cap")
    for _ in range(trials):
        rho, sigma = _pair(rng, dims=(2, 3))
        for eps in EPS_GRID:
            cap = (math.exp(eps) - 1) / (math.exp(eps) + 1)
            mech = ldp.binary_mechanism(rho, sigma, eps)
            est = ldp.trace_contraction_estimate(mech.channel, 20, rng, pairs=[(rho, sigma)])
            t.le(est, cap, 1e-10, f"mechanism eps {eps:.4g}")
            ch = ldp.random_ldp_measurement(rho.dim, 3, eps, rng)
            if ldp.verify_ldp(ch, eps).passed:
                t.le(ldp.trace_contraction_estimate(ch, 20, rng), cap, 1e-9, f"random POVM eps {eps:.4g}")
    return t.result()


@check("sup_e1_and_hellinger_caps")
def _sup_caps(trials, rng):
    t = _Tally("sup_e1_and_hellinger_caps")
    for _ in range(trials):
        d = int(rng.integers(2, 4))
        eps = float(rng.choice(EPS_GRID))
        ch = ldp.random_ldp_measurement(d, int(rng.integers(2, 5)), eps, rng)
        if not ldp.verify_ldp(ch, eps).passed:
            continue
        consts = ldp.ldp_extremes(eps)
        for _ in range(3):
            rho, sigma = _pair(rng, dims=(d,))
            a, b = ldp.apply_channel(ch, rho.matrix), ldp.apply_channel(ch, sigma.matrix)
            e1 = 0.5 * float(np.sum(np.abs(a - b)))
            t.le(e1, _sup_e1(eps), 1e-9, f"sup E_1 at eps {eps:.4g}")
            h = divergences.integral_hellinger(a, b, 0.5).H
            t.le(h.value, consts.hellinger_half_factor * e1, 1e-7 + h.abs_error_estimate,
                 f"H_1/2 at eps {eps:.4g}")
    return t.result()


@check("chi2_lemma")
def _chi2_lemma(trials, rng):
    t = _Tally("chi2_lemma")
    for _ in range(trials):
        rho, sigma = _pair(rng, dims=(2, 3))
        eps = float(rng.choice(EPS_GRID))
        mech = ldp.binary_mechanism(rho, sigma, eps)
        a, b = _pair(rng, dims=(rho.dim,))
        res = ldp.chi2_data_processing_check(mech.channel, a, b, pure_pair_trials=10,
                                             seed=int(rng.integers(2**31)), epsilon=eps)
        e1 = divergences.trace_distance(a, b)
        t.le(res.lhs, 2 * e1 * e1 * ldp.ldp_extremes(eps).chi2_sup, 1e-7, f"eps {eps:.4g}")
    return t.result()


@check("ldp_extremes_limits")
def _ldp_limits(trials, rng):
    t = _Tally("ldp_extremes_limits")
    f_kl = lambda x: x * math.log(x)
    for eps in np.concatenate([np.geomspace(1e-6, 30, max(4, trials)), [0.0]]):
        eps = float(eps)
        c = ldp.ldp_extremes(eps, f_kl)
        g = math.exp(eps)
        t.close(c.sup_trace_distance, (g - 1) / (g + 1), 1e-12, "sup E_1")
        t.close(c.chi2_sup, math.exp(-eps) * (g - 1) ** 2, 1e-9 * max(1.0, c.chi2_sup), "chi2 sup")
        t.close(c.upsilon, c.sup_trace_distance ** 2, 1e-12, "upsilon")
        t.le(c.hellinger_half_factor, 2.0, 1e-12, "H_1/2 factor at most two")
        t.le(0.0, c.reverse_pinsker, 1e-15, "reverse Pinsker nonnegative")
    small = ldp.ldp_extremes(1e-8)
    t.le(small.sup_trace_distance + small.chi2_sup + small.hellinger_half_factor, 0.0, 1e-7, "eps -> 0")
    big = ldp.ldp_extremes(40.0)
    t.close(big.sup_trace_distance, 1.0, 1e-12, "eps large")
    return t.result()


# bounds and oracle

def _separated_qubits(rng, lo=0.5, hi=0.95):
    while True:
        rho, sigma = _pair(rng, dims=(2,))
        if lo <= divergences.trace_distance(rho, sigma) <= hi:
            return rho, sigma


def _separated(rng, min_e1):
    while True:
        rho, sigma = _pair(rng, dims=(2, 3))
        if divergences.trace_distance(rho, sigma) >= min_e1:
            return rho, sigma


@check("unconstrained_sandwich")
def _unconstrained_sandwich(trials, rng):
    t = _Tally("unconstrained_sandwich")
    p, delta = 0.5, 0.1
    for _ in range(trials):
        rho, sigma = _separated_qubits(rng)
        res = oracle.quantum_sample_complexity(rho, sigma, p, delta, 10)
        if not res.found:
            continue
        cert = bounds.unconstrained_certificate(rho, sigma, p, delta)
        for e in cert.lowers():
            t.le(e.raw, res.n_star, 1e-9, e.name)
        for e in cert.uppers():
            t.le(res.n_star, e.n, 0.0, e.name)
    return t.result()


@check("ldp_sandwich")
def _ldp_sandwich(trials, rng):
    t = _Tally("ldp_sandwich")
    p, delta = 0.5, 0.1
    for _ in range(trials):
        rho, sigma = _separated(rng, 0.2)
        eps = float(rng.choice(EPS_GRID))
        wit = oracle.ldp_witness(rho, sigma, p, delta, eps)
        if not wit.found:
            continue
        cert = bounds.ldp_sc_bounds(rho, sigma, p, delta, eps)
        for e in cert.lowers():
            t.le(e.raw, wit.n_star, 1e-9, e.name)
        for name in ("ldp_upper_e1_ln5", "ldp_upper_e1"):
            t.le(wit.n_star, cert[name].n, 0.0, name)
    return t.result()


def _monotone(t, seq, label):
    for name in seq[0]:
        vals = [c[name] for c in seq]
        for a, b in zip(vals, vals[1:]):
            if math.isnan(a) or math.isnan(b) or (math.isinf(a) and math.isinf(b)):
                continue
            t.le(b, a, 1e-9 * max(1.0, abs(a)), f"{name} in {label}")


@check("certificate_monotonicity")
def _cert_monotone(trials, rng):
    t = _Tally("certificate_monotonicity")
    deltas = (0.02, 0.05, 0.1, 0.2)
    for _ in range(max(1, trials // 4)):
        rho, sigma = _pair(rng, dims=(2, 3))
        p = float(rng.choice([0.2, 0.35, 0.5]))
        raw = lambda c: {e.name: e.raw for e in c.entries}
        _monotone(t, [raw(bounds.ldp_sc_bounds(rho, sigma, p, d, 1.0)) for d in deltas], "delta")
        _monotone(t, [raw(bounds.unconstrained_certificate(rho, sigma, p, d)) for d in deltas], "delta")
        _monotone(t, [raw(bounds.ldp_sc_bounds(rho, sigma, p, 0.05, e)) for e in (0.1, 0.5, 1.0, 2.0, 4.0)],
                  "epsilon")
    return t.result()


@check("oracle_routes_agree")
def _oracle_routes(trials, rng):
    t = _Tally("oracle_routes_agree")
    for _ in range(max(1, trials // 10)):
        rho, sigma, ps, qs = _commuting_pair(rng)
        p = float(rng.uniform(0.2, 0.8))
        for n in range(1, 11):
            tensor = oracle.exact_bayes_error_n(rho, sigma, p, n)
            types = oracle.classical_bayes_error(ps, qs, p, n)
            t.close(tensor, types, 1e-10, f"n {n}")
            t.le(0.0, tensor, 0.0, "error nonnegative")
            t.le(tensor, min(p, 1 - p), 0.0, "error below the prior")
    return t.result()


@check("witness_monotone")
def _witness_monotone(trials, rng):
    t = _Tally("witness_monotone")
    grid = (0.25, 0.5, 1.0, 2.0, 4.0)
    for _ in range(max(1, trials // 2)):
        rho, sigma = _separated(rng, 0.1)
        p = float(rng.choice([0.3, 0.5]))
        ns = [oracle.ldp_witness(rho, sigma, p, 0.05, e).n_star for e in grid]
        for a, b in zip(ns, ns[1:]):
            if isinstance(a, int) and isinstance(b, int):
                t.le(b, a, 0, "witness in epsilon")
    return t.result()


@check("relation1_sandwich")
def _relation1(trials, rng):
    t = _Tally("relation1_sandwich")
    levels = (1 / 8, 1 / 16)
    for _ in range(max(1, trials // 4)):
        rho, sigma, _, _ = _commuting_pair(rng, lo=0.05)
        while divergences.trace_distance(rho, sigma) < 0.3:
            rho, sigma, _, _ = _commuting_pair(rng, lo=0.05)
        for a in levels:
            for b in levels:
                br = bounds.symmetric_asymmetric_conversions(a, b)
                pf = oracle.neyman_pearson_scan(rho, sigma, a, b, 400)
                lo = oracle.quantum_sample_complexity(rho, sigma, br.p, br.delta_for_lower, 400)
                hi = oracle.quantum_sample_complexity(rho, sigma, br.p, br.delta_for_upper, 400)
                if not (pf.found and lo.found and hi.found):
                    continue
                t.le(lo.n_star, pf.n_star, 0, f"lower at ({a}, {b})")
                t.le(pf.n_star, hi.n_star, 0, f"upper at ({a}, {b})")
    return t.result()


BOOST_CASES = ((0.25, 0.25), (0.1, 0.01), (0.25, 0.01))


@check("majority_boost")
def _majority_boost(trials, rng):
    t = _Tally("majority_boost")
    for a, target in BOOST_CASES:
        res = bounds.majority_boost(a, target)
        t.close(res.exact_error[1], a, 1e-15, "single round")
        t.le(res.exact_error[res.r_odd], target, 0.0, f"boost ({a}, {target})")
    return t.result()


def run_checks(cfg: VerifyConfig, names=None) -> list[CheckResult]:
    """Run the named checks (all by default), each with its own child generator."""
    if cfg.trials < 1:
        raise ValueError("trials must be at least 1")
    names = list(REGISTRY) if names is None else list(names)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(REGISTRY))
    by_name = dict(zip(REGISTRY, seeds))
    out = []
    for name in names:
        rng = np.random.default_rng(by_name[name])
        try:
            out.append(REGISTRY[name](cfg.trials, rng))
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            out.append(CheckResult(name, 0, 1, math.inf, f"{type(exc).__name__}: {exc}"))
    return out
