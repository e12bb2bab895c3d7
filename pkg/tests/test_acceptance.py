"""Acceptance criteria 1-10, each at its stated size and tolerance.

Run under pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from qldp import bounds, cli, divergences, ldp, oracle
from qldp.linalg import DensityMatrix, haar_unitary, random_density
from qldp.quadrature import QuadratureConfig

LN3 = math.log(3.0)
EPS_GRID = (0.1, math.log(2.0), LN3, 2.0)

RESULTS = {}


def _rng(k):
    return np.random.default_rng(1000 + k)


def _pair(rng, dim, ranks=False):
    r = (int(rng.integers(1, dim + 1)), int(rng.integers(1, dim + 1))) if ranks else (None, None)
    return random_density(dim, r[0], rng), random_density(dim, r[1], rng)


def _commuting(rng, dim=2, floor=0.0):
    u = haar_unitary(dim, rng)
    ps = rng.dirichlet(np.ones(dim)) * (1 - dim * floor) + floor
    qs = rng.dirichlet(np.ones(dim)) * (1 - dim * floor) + floor
    rot = lambda v: DensityMatrix(u @ np.diag(v) @ u.conj().T)
    return rot(ps), rot(qs), ps, qs


def criterion_1():
    """Lemma chain on 1000 pairs, dims 2-6, slack 1e-7, under 30 s."""
    rng = _rng(1)
    start = time.perf_counter()
    worst, bad = -math.inf, 0
    for _ in range(1000):
        rho, sigma = _pair(rng, int(rng.integers(2, 7)), ranks=True)
        f = divergences.fidelity(rho, sigma).value
        h = divergences.integral_hellinger(rho, sigma, 0.5).H.value
        e1 = divergences.trace_distance(rho, sigma)
        chain = [1 - f, h / 2, e1, math.sqrt(max(0.0, 1 - f * f)), math.sqrt(h)]
        gaps = [a - b for a, b in zip(chain, chain[1:])] + [chain[0] - chain[-1]]
        worst = max(worst, max(gaps))
        bad += sum(g > 1e-7 for g in gaps)
    elapsed = time.perf_counter() - start
    return bad == 0 and elapsed < 30.0, f"violations={bad} worst_gap={worst:.2e} time={elapsed:.1f}s"


def criterion_2():
    """Worked LDP anchor: ceilings 21, 2, 1 and witness exactly 9."""
    rho, sigma = DensityMatrix.diag([0.9, 0.1]), DensityMatrix.diag([0.1, 0.9])
    cert = bounds.ldp_sc_bounds(rho, sigma, 0.5, 0.1, LN3)
    up, lo1, lo2 = cert["ldp_upper_e1_ln5"].n, cert["ldp_lower_hellinger"].n, cert["ldp_lower_chi2_tenth"].n
    wit = oracle.ldp_witness(rho, sigma, 0.5, 0.1, LN3).n_star
    ok = (up, lo1, lo2, wit) == (21, 2, 1, 9) and lo1 <= wit <= up and lo2 <= wit
    return ok, f"upper={up} lowers=({lo1},{lo2}) witness={wit}"


def criterion_3():
    """Unconstrained sandwich on 200 qubit pairs with n* <= 10, under 5 min."""
    rng = _rng(3)
    start = time.perf_counter()
    pairs = violations = 0
    while pairs < 200:
        rho, sigma = _pair(rng, 2, ranks=True)
        if not 0.5 <= divergences.trace_distance(rho, sigma) <= 0.95:
            continue
        res = oracle.quantum_sample_complexity(rho, sigma, 0.5, 0.1, 10, method="tensor")
        if not res.found:
            continue
        pairs += 1
        cert = bounds.unconstrained_certificate(rho, sigma, 0.5, 0.1)
        violations += sum(e.raw > res.n_star for e in cert.lowers())
        violations += sum(res.n_star > e.n for e in cert.uppers())
    elapsed = time.perf_counter() - start
    return violations == 0 and elapsed < 300.0, f"pairs={pairs} violations={violations} time={elapsed:.1f}s"


def criterion_4():
    """Mechanism identity to 1e-12 on 500 pairs x 4 eps; |margin| <= 1e-10."""
    rng = _rng(4)
    worst_id = worst_margin = 0.0
    for _ in range(500):
        rho, sigma = _pair(rng, int(rng.integers(2, 4)), ranks=True)
        e1 = divergences.trace_distance(rho, sigma)
        for eps in EPS_GRID:
            mech = ldp.binary_mechanism(rho, sigma, eps)
            out = 0.5 * float(np.sum(np.abs(mech.out_p - mech.out_q)))
            factor = (math.exp(eps) - 1) / (math.exp(eps) + 1)
            worst_id = max(worst_id, abs(out - factor * e1))
            worst_margin = max(worst_margin, abs(ldp.verify_ldp(mech.channel, eps).margin))
    return worst_id <= 1e-12 and worst_margin <= 1e-10, f"identity_err={worst_id:.1e} margin={worst_margin:.1e}"


def criterion_5():
    """eta_Tr estimates and output E_1 of verified eps-LDP POVMs stay below their caps (+1e-9)."""
    rng = _rng(5)
    channels = bad = 0
    worst = -math.inf
    for _ in range(200):
        d = int(rng.integers(2, 5))
        eps = float(rng.choice(EPS_GRID))
        ch = ldp.random_ldp_measurement(d, int(rng.integers(2, 6)), eps, rng)
        if not ldp.verify_ldp(ch, eps).passed:
            continue
        channels += 1
        caps = ldp.ldp_extremes(eps)
        eta_cap, sup_cap = caps.eta_trace_bound, caps.sup_trace_distance
        est = ldp.trace_contraction_estimate(ch, 30, rng)
        gaps = [est - eta_cap]
        for _ in range(5):
            rho, sigma = _pair(rng, d, ranks=True)
            a, b = ldp.apply_channel(ch, rho), ldp.apply_channel(ch, sigma)
            gaps.append(0.5 * float(np.sum(np.abs(a - b))) - sup_cap)
        worst = max(worst, max(gaps))
        bad += sum(x > 1e-9 for x in gaps)
    return bad == 0 and channels >= 150, f"channels={channels} violations={bad} worst_gap={worst:.2e}"


def criterion_6():
    """chi^2 lemma with the analytic cap on 100 cases; three chi^2 routes agree within 1e-6 on 100 pairs."""
    rng = _rng(6)
    lemma_bad = 0
    for _ in range(100):
        d = int(rng.integers(2, 4))
        rho, sigma = _pair(rng, d, ranks=True)
        eps = float(rng.choice(EPS_GRID))
        mech = ldp.binary_mechanism(rho, sigma, eps)
        a, b = _pair(rng, d, ranks=True)
        res = ldp.chi2_data_processing_check(mech.channel, a, b, pure_pair_trials=5, seed=int(rng.integers(2**31)),
                                             epsilon=eps, tol=1e-7)
        lemma_bad += not (res.holds and res.rhs_analytic is not None)
    cfg = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-12)
    worst = 0.0
    for _ in range(100):
        rho, sigma = _pair(rng, int(rng.integers(2, 5)))
        closed = divergences.chi_squared(rho, sigma).value
        quad = divergences.integral_hellinger(rho, sigma, 2.0, cfg).H.value
        fpp = divergences.f_divergence_integral(lambda x: 2.0 + 0.0 * x, rho, sigma, cfg).value
        worst = max(worst, abs(quad - closed), abs(fpp - closed))
    return lemma_bad == 0 and worst <= 1e-6, f"lemma_failures={lemma_bad} route_disagreement={worst:.1e}"


def criterion_7():
    """JS <= c H_{1-lam} on a 3x3 grid x 100 pairs; corollary constant and 32 sqrt 2 improvement."""
    rng = _rng(7)
    grid = (0.1, 0.25, 0.5)
    worst = -math.inf
    for _ in range(100):
        rho, sigma = _pair(rng, int(rng.integers(2, 5)), ranks=True)
        hell = {lam: divergences.integral_hellinger(rho, sigma, 1 - lam).H.value for lam in grid}
        for a in grid:
            js = divergences.jensen_shannon(rho, sigma, a).value
            for lam in grid:
                worst = max(worst, js - bounds.js_hellinger_constant(a, lam) * hell[lam])
    alphas = (0.05, 0.1, 0.25, 0.5)
    const_err = max(abs(bounds.js_hellinger_corollary_constant(a) - a * math.sqrt(2)) for a in alphas)
    factor_err = max(abs(bounds.legacy_improvement_factor(a) - 32 * math.sqrt(2)) for a in alphas)
    ok = worst <= 1e-7 and const_err <= 1e-12 and factor_err <= 1e-12
    return ok, f"worst_gap={worst:.2e} constant_err={const_err:.1e} factor_err={factor_err:.1e}"


def criterion_8():
    """Integral H_1/2 vs classical on 200 commuting pairs; integral H_2 vs chi^2; both within 1e-6."""
    rng = _rng(8)
    worst_half = worst_two = 0.0
    for _ in range(200):
        rho, sigma, ps, qs = _commuting(rng, int(rng.integers(2, 6)), floor=0.01)
        classical = 2.0 * (1.0 - float(np.sum(np.sqrt(ps * qs))))
        worst_half = max(worst_half, abs(divergences.integral_hellinger(rho, sigma, 0.5).H.value - classical))
        chi2 = divergences.chi_squared(rho, sigma).value
        worst_two = max(worst_two, abs(divergences.integral_hellinger(rho, sigma, 2.0).H.value - chi2))
    return worst_half <= 1e-6 and worst_two <= 1e-6, f"H_1/2_err={worst_half:.1e} H_2_err={worst_two:.1e}"


def criterion_9():
    """Sweep over eps in [0.1, 5] shows a best-lower-bound switch between Hellinger and E_1 (chi^2) types."""
    rho, sigma = DensityMatrix.diag([0.95, 0.05]), DensityMatrix.diag([1.0, 0.0])
    grid = [round(0.1 * k, 10) for k in range(1, 51)]
    rep = cli.cmd_sweep(rho, sigma, 0.5, 0.1, grid)
    tags = [r["best_lower_tag"] for r in rep.payload["rows"]]
    switches = [(grid[i], tags[i], tags[i + 1]) for i in range(len(tags) - 1) if tags[i] != tags[i + 1]]
    crossed = any({a, b} == {"hellinger", "chi2"} for _, a, b in switches)
    where = ", ".join(f"{a}->{b} after eps={e}" for e, a, b in switches)
    return crossed, f"switches: {where or 'none'}"


def criterion_10():
    """Relation sandwich on commuting qubit pairs at (1/8,1/8), (1/16,1/8); majority boost on three cases."""
    rng = _rng(10)
    checked = bad = 0
    while checked < 40:
        rho, sigma, _, _ = _commuting(rng, 2, floor=0.05)
        if divergences.trace_distance(rho, sigma) < 0.3:
            continue
        for a, b in ((1 / 8, 1 / 8), (1 / 16, 1 / 8)):
            br = bounds.symmetric_asymmetric_conversions(a, b)
            pf = oracle.neyman_pearson_scan(rho, sigma, a, b, 500)
            lo = oracle.quantum_sample_complexity(rho, sigma, br.p, br.delta_for_lower, 500)
            hi = oracle.quantum_sample_complexity(rho, sigma, br.p, br.delta_for_upper, 500)
            checked += 1
            bad += not (pf.found and lo.found and hi.found and lo.n_star <= pf.n_star <= hi.n_star)
    boost_bad = []
    for alpha, target in ((0.25, 0.25), (0.1, 0.01), (0.25, 0.01)):
        res = bounds.majority_boost(alpha, target)
        # r = 1 is no repetition at all: the error stays alpha
        if res.exact_error[res.r_odd] > target or abs(res.exact_error[1] - alpha) > 1e-15:
            boost_bad.append((alpha, target))
    return bad == 0 and not boost_bad, f"bracket_cases={checked} violations={bad} boost_failures={boost_bad}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k):
    ok, detail = CRITERIA[k - 1]()
    RESULTS[k] = _line(k, ok, detail)
    print(RESULTS[k])
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        failures += not ok
        print(_line(k, ok, detail), flush=True)
    raise SystemExit(1 if failures else 0)
