import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.stats import binom

from conftest import seeded_pair
from qldp.errors import DimCapExceeded, RangeViolation
from qldp.ldp import binary_mechanism
from qldp.linalg import DensityMatrix, haar_unitary, tensor_power
from qldp.oracle import (
    BINARY_N_CAP,
    CapExceeded,
    binary_bayes_error,
    binary_sample_complexity,
    classical_bayes_error,
    classical_np_type2,
    commuting_spectra,
    exact_bayes_error_n,
    ldp_witness,
    neyman_pearson_scan,
    quantum_np_type2,
    quantum_sample_complexity,
)

LN3 = math.log(3.0)
seeds = st.integers(0, 2**32 - 1)


def _binary_reference(a, b, p, n):
    k = np.arange(n + 1)
    return float(np.sum(np.minimum(p * binom.pmf(k, n, a), (1 - p) * binom.pmf(k, n, b))))


def test_binary_trace_frozen():
    res = binary_sample_complexity([0.7, 0.3], [0.3, 0.7], 0.5, 0.1)
    assert res.n_star == 9
    expected = [0.3, 0.3, 0.216, 0.216, 0.16308, 0.16308, 0.126036, 0.126036, 0.0988086]
    got = [res.error_trace[n] for n in range(1, 10)]
    assert np.allclose(got, expected, atol=1e-6)
    for n in range(1, 10):
        assert res.error_trace[n] == pytest.approx(_binary_reference(0.7, 0.3, 0.5, n), abs=1e-14)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.05, 0.95), st.integers(1, 300))
def test_binary_error_matches_scipy(a, b, p, n):
    assert binary_bayes_error([a, 1 - a], [b, 1 - b], p, n) == pytest.approx(
        _binary_reference(a, b, p, n), abs=1e-13)


def test_gallop_matches_linear_scan():
    # n* lies beyond the linear window, so the gallop and bisect path is used
    P, Q = [0.52, 0.48], [0.48, 0.52]
    res = binary_sample_complexity(P, Q, 0.5, 0.1)
    n = res.n_star
    assert n > 256
    assert binary_bayes_error(P, Q, 0.5, n) <= 0.1 < binary_bayes_error(P, Q, 0.5, n - 1)


def test_witness_examples(diag_pair):
    assert ldp_witness(*diag_pair, 0.5, 0.1, LN3).n_star == 9
    flat = ldp_witness(*diag_pair, 0.5, 0.1, 0.0)
    assert flat.n_star == CapExceeded(BINARY_N_CAP) and not flat.found
    assert str(flat.n_star) == "CapExceeded(1000000)"
    with pytest.raises(RangeViolation):
        binary_sample_complexity([0.5, 0.5], [0.5, 0.5], 0.5, 0.1, BINARY_N_CAP + 1)


@pytest.mark.parametrize("seed", range(5))
def test_witness_monotone_in_epsilon(seed):
    rho, sigma = seeded_pair(seed, 2)
    ns = [ldp_witness(rho, sigma, 0.5, 0.05, e).n_star for e in (0.5, 1.0, 2.0, 4.0)]
    ints = [n for n in ns if isinstance(n, int)]
    assert ints == sorted(ints, reverse=True)


def test_quantum_sample_complexity_examples(diag_pair):
    assert quantum_sample_complexity(*diag_pair, 0.5, 0.1, 10).n_star == 1
    close = DensityMatrix.diag([0.6, 0.4]), DensityMatrix.diag([0.4, 0.6])
    res = quantum_sample_complexity(*close, 0.5, 0.1, 100)
    assert res.n_star == 41
    assert res.error_trace[41] <= 0.1 < res.error_trace[40]


@given(seeds, st.floats(0.1, 0.9))
def test_tensor_and_type_routes_agree(seed, p):
    rng = np.random.default_rng(seed)
    u = haar_unitary(2, rng)
    ps, qs = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
    rho = DensityMatrix(u @ np.diag(ps) @ u.conj().T)
    sigma = DensityMatrix(u @ np.diag(qs) @ u.conj().T)
    assert commuting_spectra(rho, sigma) is not None
    for n in (1, 4, 7, 10):
        assert exact_bayes_error_n(rho, sigma, p, n) == pytest.approx(classical_bayes_error(ps, qs, p, n), abs=1e-10)


@given(seeds)
def test_noncommuting_error_against_direct_eigensolve(seed):
    rho, sigma = seeded_pair(seed, 2)
    p = 0.4
    for n in (1, 2, 3):
        a, b = tensor_power(rho.matrix, n), tensor_power(sigma.matrix, n)
        w = np.linalg.eigvalsh(p * a - (1 - p) * b)
        ref = p - np.sum(w[w > 0])
        err = exact_bayes_error_n(rho, sigma, p, n)
        assert err == pytest.approx(ref, abs=1e-12)
        assert 0.0 <= err <= min(p, 1 - p)


def test_cap_exceeded_row():
    rho, sigma = seeded_pair(3, 3)
    res = quantum_sample_complexity(rho, sigma, 0.5, 1e-9, 20, cap=81)
    assert res.n_star == CapExceeded(4)
    assert sorted(res.error_trace) == [1, 2, 3, 4]


def _lp_type2(ps, qs, alpha):
    res = linprog(c=qs, A_ub=[-np.asarray(ps)], b_ub=[alpha - 1.0], bounds=[(0, 1)] * len(ps), method="highs")
    return res.fun


@given(st.integers(2, 3), seeds, st.sampled_from([0.05, 0.125, 0.3]), st.integers(1, 4))
def test_classical_np_matches_lp(d, seed, alpha, n):
    rng = np.random.default_rng(seed)
    ps, qs = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    joint_p = [math.prod(ps[i] for i in idx) for idx in itertools.product(range(d), repeat=n)]
    joint_q = [math.prod(qs[i] for i in idx) for idx in itertools.product(range(d), repeat=n)]
    assert classical_np_type2(ps, qs, alpha, n) == pytest.approx(_lp_type2(joint_p, joint_q, alpha), abs=1e-9)


def test_np_examples():
    a, b = DensityMatrix.pure([1, 0]), DensityMatrix.pure([0, 1])
    assert neyman_pearson_scan(a, b, 0.1, 0.1, 5).n_star == 1
    with pytest.raises(DimCapExceeded):
        neyman_pearson_scan(*seeded_pair(0, 3), 0.1, 0.1, 9)


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
@pytest.mark.parametrize("seed", range(4))
def test_quantum_np_matches_sdp(seed):
    cp = pytest.importorskip("cvxpy")
    rho, sigma = seeded_pair(seed, 2)
    alpha = 0.1
    for n in (1, 2):
        a, b = tensor_power(rho.matrix, n), tensor_power(sigma.matrix, n)
        d = a.shape[0]
        t = cp.Variable((d, d), hermitian=True)
        cons = [t >> 0, np.eye(d) - t >> 0, cp.real(cp.trace(a @ (np.eye(d) - t))) <= alpha]
        prob = cp.Problem(cp.Minimize(cp.real(cp.trace(b @ t))), cons)
        prob.solve(solver="CLARABEL")
        assert quantum_np_type2(a, b, alpha) == pytest.approx(prob.value, abs=1e-6)


def test_quantum_np_on_commuting_input_is_exact():
    rho, sigma = DensityMatrix.diag([0.7, 0.3]), DensityMatrix.diag([0.2, 0.8])
    for n in (1, 3, 5):
        ref = classical_np_type2([0.7, 0.3], [0.2, 0.8], 0.125, n)
        got = quantum_np_type2(tensor_power(rho.matrix, n), tensor_power(sigma.matrix, n), 0.125)
        assert got == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("alpha,beta", [(1 / 8, 1 / 8), (1 / 16, 1 / 8), (1 / 8, 1 / 16), (1 / 16, 1 / 16)])
def test_relation1_sandwich(alpha, beta):
    from qldp.bounds import symmetric_asymmetric_conversions
    rho, sigma = DensityMatrix.diag([0.8, 0.2]), DensityMatrix.diag([0.35, 0.65])
    br = symmetric_asymmetric_conversions(alpha, beta)
    pf = neyman_pearson_scan(rho, sigma, alpha, beta, 200).n_star
    lo = quantum_sample_complexity(rho, sigma, br.p, br.delta_for_lower, 200).n_star
    hi = quantum_sample_complexity(rho, sigma, br.p, br.delta_for_upper, 200).n_star
    assert lo <= pf <= hi
