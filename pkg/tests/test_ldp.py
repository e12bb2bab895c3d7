import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeded_pair
from qldp.divergences import chi_squared, integral_hellinger, trace_distance
from qldp.errors import DimensionMismatch, ValidationError
from qldp.ldp import (
    Channel,
    apply_channel,
    binary_mechanism,
    chi2_data_processing_check,
    identity_channel,
    ldp_extremes,
    random_kraus_channel,
    random_ldp_measurement,
    replacer_channel,
    trace_contraction_estimate,
    verify_ldp,
)
from qldp.linalg import DensityMatrix

LN3 = math.log(3.0)
seeds = st.integers(0, 2**32 - 1)
epsilons = st.sampled_from([0.1, math.log(2.0), LN3, 2.0])


def test_mechanism_on_diag_pair(diag_pair):
    mech = binary_mechanism(*diag_pair, LN3)
    assert mech.kappa == pytest.approx(0.75, abs=1e-15)
    assert np.allclose(mech.out_p, [0.7, 0.3], atol=1e-15)
    assert np.allclose(mech.out_q, [0.3, 0.7], atol=1e-15)
    assert verify_ldp(mech.channel, LN3).margin == pytest.approx(0.0, abs=1e-12)


def test_mechanism_extremes(diag_pair):
    flat = binary_mechanism(*diag_pair, 0.0)
    assert np.allclose(flat.out_p, [0.5, 0.5]) and np.allclose(flat.out_q, [0.5, 0.5])
    sharp = binary_mechanism(*diag_pair, 20.0)
    assert np.allclose(sharp.out_p, [0.9, 0.1], atol=1e-8)


def test_ties_go_to_the_positive_projector():
    rho = DensityMatrix.diag([0.5, 0.5, 0.0])
    sigma = DensityMatrix.diag([0.5, 0.0, 0.5])
    mech = binary_mechanism(rho, sigma, 1.0)
    # the shared eigenvector with rho - sigma = 0 counts towards the first outcome
    k = mech.kappa
    assert np.allclose(mech.out_p, [k, 1 - k])
    assert np.allclose(mech.out_q, [0.5 * k + 0.5 * (1 - k), 0.5 * (1 - k) + 0.5 * k])


@given(st.integers(2, 3), seeds, epsilons)
def test_mechanism_contraction_identity(d, seed, eps):
    rho, sigma = seeded_pair(seed, d, full_rank=False)
    mech = binary_mechanism(rho, sigma, eps)
    out = 0.5 * np.sum(np.abs(mech.out_p - mech.out_q))
    factor = (math.exp(eps) - 1) / (math.exp(eps) + 1)
    assert out == pytest.approx(factor * trace_distance(rho, sigma), abs=1e-12)
    assert abs(verify_ldp(mech.channel, eps).margin) <= 1e-10


def test_verify_ldp_examples():
    rng = np.random.default_rng(0)
    assert verify_ldp(replacer_channel(3), 0.0, samples=20).passed
    rep = verify_ldp(identity_channel(2), 5.0, samples=20)
    assert rep.method == "sampled_pure" and rep.margin == pytest.approx(-1.0, abs=1e-12)
    # a POVM that reports the basis outcome exactly is not private at any finite level
    povm = Channel.measurement([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert not verify_ldp(povm, 10.0).passed
    ch = random_ldp_measurement(3, 4, 1.0, rng)
    rep = verify_ldp(ch, 1.0)
    assert rep.method == "exact_povm" and rep.passed


def test_apply_channel_examples(diag_pair):
    rho = diag_pair[0]
    assert np.allclose(apply_channel(identity_channel(2), rho).matrix, rho.matrix)
    assert np.allclose(apply_channel(Channel.measurement([np.eye(2)]), rho), [1.0])
    with pytest.raises(DimensionMismatch):
        apply_channel(identity_channel(3), rho)


def test_channel_validation():
    with pytest.raises(ValidationError):
        Channel.kraus([0.9 * np.eye(2)])
    with pytest.raises(ValidationError):
        Channel.measurement([np.diag([1.2, 0.5]), np.diag([-0.2, 0.5])])


def test_trace_contraction_examples(diag_pair):
    assert trace_contraction_estimate(identity_channel(3), 5) == pytest.approx(1.0, abs=1e-12)
    assert trace_contraction_estimate(replacer_channel(3), 5) == pytest.approx(0.0, abs=1e-12)
    mech = binary_mechanism(*diag_pair, LN3)
    helstrom_pair = [(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))]
    est = trace_contraction_estimate(mech.channel, 50, seed=1, pairs=helstrom_pair)
    assert est == pytest.approx(0.5, abs=1e-12)
    assert trace_contraction_estimate(mech.channel, 50, seed=1) <= 0.5 + 1e-10


@given(st.integers(2, 4), st.integers(2, 4), seeds, epsilons)
def test_random_ldp_measurements_respect_caps(d, k, seed, eps):
    rng = np.random.default_rng(seed)
    ch = random_ldp_measurement(d, k, eps, rng)
    assert verify_ldp(ch, eps).passed
    cap = ldp_extremes(eps)
    assert trace_contraction_estimate(ch, 20, rng) <= cap.eta_trace_bound + 1e-9
    rho, sigma = seeded_pair(seed, d, full_rank=False)
    a, b = apply_channel(ch, rho), apply_channel(ch, sigma)
    e1 = 0.5 * np.sum(np.abs(a - b))
    g = math.exp(eps)
    assert e1 <= math.exp(-eps) * (g - 1) ** 2 / (g - 1 / g) + 1e-9
    assert integral_hellinger(a, b, 0.5).H.value <= cap.hellinger_half_factor * e1 + 1e-7


def test_ldp_extremes_at_ln3():
    c = ldp_extremes(LN3, lambda x: x * x - 1)
    assert c.sup_trace_distance == pytest.approx(0.5, abs=1e-15)
    assert c.eta_trace_bound == pytest.approx(0.5, abs=1e-15)
    assert c.chi2_sup == pytest.approx(4 / 3, abs=1e-15)
    assert c.upsilon == pytest.approx(0.25, abs=1e-15)
    assert c.reverse_pinsker == pytest.approx(c.chi2_sup, abs=1e-12)
    zero = ldp_extremes(0.0, lambda x: x * x - 1)
    assert (zero.sup_trace_distance, zero.chi2_sup, zero.upsilon, zero.hellinger_half_factor,
            zero.reverse_pinsker) == (0.0, 0.0, 0.0, 0.0, 0.0)


@given(st.floats(1e-6, 30.0))
def test_reverse_pinsker_chi2_special_case(eps):
    c = ldp_extremes(eps, lambda x: x * x - 1)
    assert c.reverse_pinsker == pytest.approx(c.chi2_sup, rel=1e-10, abs=1e-12)


def test_chi2_lemma_examples(diag_pair):
    rho, sigma = diag_pair
    mech = binary_mechanism(rho, sigma, LN3)
    res = chi2_data_processing_check(mech.channel, rho, sigma, pure_pair_trials=20, epsilon=LN3)
    assert res.lhs == pytest.approx(chi_squared([0.7, 0.3], [0.3, 0.7]).value, abs=1e-15)
    assert res.lhs == pytest.approx(0.761904761904, abs=1e-11)
    assert res.rhs_analytic == pytest.approx(2 * 0.64 * 4 / 3, abs=1e-12)
    assert res.holds
    rep = chi2_data_processing_check(replacer_channel(2), rho, sigma, pure_pair_trials=5)
    assert rep.lhs == 0.0 and rep.holds


@pytest.mark.parametrize("seed", range(10))
def test_chi2_lemma_on_random_kraus(seed):
    rng = np.random.default_rng(seed)
    ch = random_kraus_channel(2, 2, 4, rng)
    rho, sigma = seeded_pair(seed, 2, full_rank=False)
    res = chi2_data_processing_check(ch, rho, sigma, pure_pair_trials=30, seed=seed)
    assert math.isfinite(res.rhs_sampled)
    assert res.holds
