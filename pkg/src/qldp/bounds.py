"""Sample-complexity bounds for binary quantum hypothesis testing.

Every bound is reported as a :class:`BoundEntry` with its raw real value,
the integer sample size it implies, and a flag telling whether the
regime in which it was proven covers the requested ``(p, delta, eps)``.
Nothing is suppressed: out-of-regime entries are shown but flagged.

Convention: ``rho`` carries prior ``p``; ``delta`` is the target Bayes
error; all logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

from scipy.stats import binom

from .divergences import (
    fidelity,
    hockey_stick,
    integral_hellinger,
    jensen_shannon,
    petz_quantities,
    state,
)
from .errors import RangeViolation
from .linalg import positive_part_trace

LOWER = "lower"
UPPER = "upper"
CEIL_RTOL = 1e-9

# JS <= p*sqrt(2)*H_{1-lam} turns the 3/16 JS bound into 3/(32 sqrt 2) log2/(lam H)
JS_HELLINGER_PROVEN = 3.0 * math.sqrt(2.0) / 64.0
JS_HELLINGER_UNPROVEN = 3.0 * math.sqrt(2.0) / 16.0
LEGACY_JS_COEFF = 256.0


def ceil_count(raw: float) -> int | None:
    """Smallest admissible sample size for a raw bound; ``None`` if infinite.

    A relative slack of ``CEIL_RTOL`` absorbs rounding so that bounds that
    are integers in exact arithmetic are not pushed up by one.
    """
    if not math.isfinite(raw):
        return None
    return max(1, math.ceil(raw - CEIL_RTOL * max(1.0, abs(raw))))


def _ratio(num: float, den: float) -> float:
    if den <= 0.0:
        return math.inf if num > 0 else math.nan
    return num / den


@dataclass(frozen=True)
class BoundEntry:
    name: str
    side: str
    raw: float
    n: int | None
    assumptions_met: bool
    up_to_universal_constant: bool = False
    note: str = ""

    @classmethod
    def make(cls, name, side, raw, ok, constant=False, note=""):
        raw = float(raw)
        return cls(name, side, raw, ceil_count(raw), bool(ok), constant, note)

    @property
    def usable(self) -> bool:
        """Valid in this regime and free of unspecified constants."""
        return self.assumptions_met and not self.up_to_universal_constant and not math.isnan(self.raw)


def _encode(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _decode(x):
    return float(x) if isinstance(x, str) else x


@dataclass(frozen=True)
class BoundsCertificate:
    p: float
    delta: float
    epsilon: float | None = None
    entries: tuple = ()
    flags: tuple = ()
    params: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> BoundEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self):
        return [e.name for e in self.entries]

    def lowers(self, usable_only: bool = True):
        return [e for e in self.entries if e.side == LOWER and (e.usable or not usable_only)]

    def uppers(self, usable_only: bool = True):
        return [e for e in self.entries if e.side == UPPER and (e.usable or not usable_only)]

    def best_lower(self) -> BoundEntry | None:
        cands = [e for e in self.lowers() if not math.isnan(e.raw)]
        return max(cands, key=lambda e: e.raw, default=None)

    def best_upper(self) -> BoundEntry | None:
        cands = [e for e in self.uppers() if not math.isnan(e.raw)]
        return min(cands, key=lambda e: e.raw, default=None)

    def merged(self, other: "BoundsCertificate") -> "BoundsCertificate":
        return BoundsCertificate(
            self.p, self.delta, self.epsilon if self.epsilon is not None else other.epsilon,
            self.entries + other.entries,
            tuple(dict.fromkeys(self.flags + other.flags)),
            {**self.params, **other.params},
        )

    def to_dict(self) -> dict:
        return {
            "inputs": {"p": self.p, "delta": self.delta, "epsilon": _encode(self.epsilon)},
            "entries": [{k: _encode(v) for k, v in asdict(e).items()} for e in self.entries],
            "flags": list(self.flags),
            "params": {k: _encode(v) for k, v in self.params.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundsCertificate":
        entries = []
        for e in d["entries"]:
            e = dict(e)
            e["raw"] = _decode(e["raw"])
            entries.append(BoundEntry(**e))
        inp = d["inputs"]
        eps = inp.get("epsilon")
        return cls(
            inp["p"], inp["delta"], _decode(eps) if eps is not None else None,
            tuple(entries), tuple(d.get("flags", ())),
            {k: _decode(v) for k, v in d.get("params", {}).items()},
        )


def _check_prior(p: float, delta: float | None = None):
    if not 0.0 < p < 1.0:
        raise RangeViolation(f"prior p must lie in (0,1), got {p}")
    if delta is not None and not delta > 0.0:
        raise RangeViolation(f"delta must be positive, got {delta}")


def bayes_error(rho, sigma, p: float) -> float:
    """Helstrom error ``p - Tr(p rho - (1-p) sigma)_+`` (rho has prior p)."""
    _check_prior(p)
    rho, sigma = state(rho), state(sigma)
    err = p - positive_part_trace(p * rho.matrix - (1.0 - p) * sigma.matrix)
    return min(max(err, 0.0), min(p, 1.0 - p))


def prior_lambda(p: float) -> float:
    """``log 2 / (2 log(1/p))``: the exponent that makes ``p^-lambda = sqrt 2``."""
    return math.log(2.0) / (2.0 * math.log(1.0 / p))


def js_hellinger_constant(alpha: float, lam: float) -> float:
    """Constant c in ``JS_alpha <= c * H_{1-lam}``."""
    if not (0.0 < alpha < 1.0 and 0.0 < lam < 1.0):
        raise RangeViolation("alpha and lambda must lie in (0, 1)")
    return alpha * ((lam * (1.0 - alpha)) / ((1.0 - lam) * alpha)) ** lam


def legacy_improvement_factor(alpha: float) -> float:
    """Ratio of the legacy JS coefficient (256) to ``4 c / alpha`` at the prior lambda."""
    c = js_hellinger_corollary_constant(alpha)
    return LEGACY_JS_COEFF / (4.0 * c / alpha)


def js_hellinger_corollary_constant(alpha: float) -> float:
    """``alpha * e^{lam log(1/alpha)}`` at ``lam = prior_lambda(alpha)``; equals alpha*sqrt 2."""
    lam = prior_lambda(alpha)
    return alpha * math.exp(lam * math.log(1.0 / alpha))


def fidelity_sc_bounds(rho, sigma, p: float, delta: float, f: float | None = None,
                       hellinger: float | None = None):
    """Fidelity sandwich on the Bayesian sample complexity.

    Returns (fidelity_lower, hellinger_lower, fidelity_upper, bures_upper).
    """
    _check_prior(p, delta)
    if f is None:
        f = fidelity(rho, sigma).value
    if hellinger is None:
        hellinger = integral_hellinger(rho, sigma, 0.5).H.value
    ok = delta <= p <= 0.5 and f < 1.0
    num_lo = 0.5 * math.log(p * (1.0 - p) / (delta * (1.0 - delta)))
    num_up = math.log((1.0 - p) / delta)
    neg_log_f = -math.log(f) if f > 0 else math.inf
    if f <= 0.0:
        lo, hi = 0.0, 0.0
    else:
        lo, hi = _ratio(num_lo, neg_log_f), _ratio(num_up, neg_log_f)
    return (
        BoundEntry.make("fidelity_lower", LOWER, lo, ok),
        BoundEntry.make("hellinger_lower", LOWER, _ratio(num_lo, hellinger), ok and hellinger <= 1.0),
        BoundEntry.make("fidelity_upper", UPPER, hi, ok),
        BoundEntry.make("bures_upper", UPPER, _ratio(num_up, 1.0 - f), ok),
    )


def golden_section_min(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6):
    """Minimiser of a unimodal ``fn`` on ``[lo, hi]``; returns (x, fn(x))."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _chernoff_upper(rho, sigma, p, delta, s):
    q = petz_quantities(rho, sigma, s).Q
    return _ratio(math.log(p**s * (1.0 - p) ** (1.0 - s) / delta), -math.log(q) if q > 0 else math.inf)


def prior_sc_bounds(rho, sigma, p: float, delta: float | None = None, optimize_s: bool = False,
                    cfg=None) -> BoundsCertificate:
    """Prior-dependent bounds built around ``delta = p/4``.

    With a caller-supplied ``delta`` the general Petz upper and the Fano
    lower are evaluated at that ``delta``; the p/4 entries are flagged
    according to whether they transfer (lower bounds need delta <= p/4,
    the p/4 upper needs delta >= p/4).
    """
    _check_prior(p, delta)
    rho, sigma = state(rho), state(sigma)
    quarter = p / 4.0
    delta = quarter if delta is None else delta
    small_prior = p <= 0.5
    lam = prior_lambda(p) if p < 1.0 / math.sqrt(2.0) else math.nan
    js = jensen_shannon(rho, sigma, p).value
    entries = []
    flags = []

    entries.append(BoundEntry.make(
        "js_lower", LOWER, _ratio(3.0 / 16.0 * p * math.log(1.0 / p), js),
        small_prior and delta <= quarter))
    gam = 1.0 - delta / p
    fano_ok = small_prior and 0.0 < gam <= 1.0
    fano = p * gam * math.log((1.0 - p) / p) + p * p * gam * gam if gam > 0 else math.nan
    entries.append(BoundEntry.make("js_fano_lower", LOWER, _ratio(fano, js), fano_ok))

    h_int = pbar = math.nan
    if math.isfinite(lam):
        h_int = integral_hellinger(rho, sigma, 1.0 - lam, cfg).H.value
        pbar = petz_quantities(rho, sigma, 1.0 - lam).H
        ok = small_prior and delta <= quarter
        entries.append(BoundEntry.make(
            "js_hellinger_lower", LOWER, _ratio(JS_HELLINGER_PROVEN * math.log(2.0), lam * h_int), ok))
        entries.append(BoundEntry.make(
            "js_hellinger_lower_unproven", LOWER,
            _ratio(JS_HELLINGER_UNPROVEN * math.log(2.0), lam * h_int), False,
            note="constant 3*sqrt(2)/16 is not implied by the JS chain, which supports 3*sqrt(2)/64"))
        entries.append(BoundEntry.make(
            "petz_upper_quarter", UPPER, _ratio(2.0, lam * pbar), small_prior and delta >= quarter))
        num = math.log(p ** (1.0 - lam) * (1.0 - p) ** lam / delta)
        entries.append(BoundEntry.make("petz_upper", UPPER, _ratio(num, lam * pbar), True))
    else:
        flags.append("prior_lambda_undefined")

    params = {"lambda": lam, "js": js, "hellinger_int": h_int, "petz_hellinger": pbar}
    if optimize_s:
        s, val = golden_section_min(lambda s: _chernoff_upper(rho, sigma, p, delta, s), 0.01, 0.99)
        entries.append(BoundEntry.make("chernoff_upper_optimized", UPPER, val, True))
        params["s_star"] = s
    if js <= 0.0:
        flags.append("degenerate_inputs")
    return BoundsCertificate(p, delta, None, tuple(entries), tuple(flags), params)


def unconstrained_certificate(rho, sigma, p: float, delta: float, optimize_s: bool = False,
                              cfg=None) -> BoundsCertificate:
    """Fidelity sandwich plus the prior-dependent entries at the given delta."""
    rho, sigma = state(rho), state(sigma)
    f = fidelity(rho, sigma).value
    h = integral_hellinger(rho, sigma, 0.5, cfg).H.value
    fid = BoundsCertificate(p, delta, None, fidelity_sc_bounds(rho, sigma, p, delta, f, h),
                            ("degenerate_inputs",) if f >= 1.0 else (),
                            {"fidelity": f, "hellinger_half": h})
    return fid.merged(prior_sc_bounds(rho, sigma, p, delta, optimize_s, cfg))


class PrivacyFactors(NamedTuple):
    contraction: float  # (e^eps - 1)/(e^eps + 1)
    chi2: float  # e^-eps (e^eps - 1)^2
    linear: float  # e^-eps (e^eps - 1)


def privacy_factors(epsilon: float) -> PrivacyFactors:
    return PrivacyFactors(math.tanh(epsilon / 2.0), 4.0 * math.sinh(epsilon / 2.0) ** 2, -math.expm1(-epsilon))


def ldp_sc_bounds(rho, sigma, p: float, delta: float, epsilon: float, cfg=None) -> BoundsCertificate:
    """Bounds on the sample complexity under eps-local differential privacy."""
    _check_prior(p, delta)
    if epsilon < 0:
        raise RangeViolation("epsilon must be nonnegative")
    rho, sigma = state(rho), state(sigma)
    e1 = hockey_stick(rho, sigma, 1.0).value
    h_half = integral_hellinger(rho, sigma, 0.5, cfg).H.value
    js = jensen_shannon(rho, sigma, p).value
    k, chi, lin = privacy_factors(epsilon)
    inv_k = 1.0 / k if k > 0 else math.inf
    e1sq = e1 * e1
    half = p == 0.5
    small_prior = p <= 0.5
    quarter = p / 4.0
    ln2 = math.log(2.0)
    entries = []

    entries.append(BoundEntry.make(
        "ldp_upper_e1_ln5", UPPER, _ratio(inv_k**2 * 2.0 * math.log(5.0), e1sq), half and delta >= 0.1))
    entries.append(BoundEntry.make(
        "ldp_upper_e1", UPPER, _ratio(inv_k**2 * 2.0 * math.log(1.0 / delta), e1sq), delta < 1.0))
    lam = prior_lambda(p) if p < 1.0 / math.sqrt(2.0) else math.nan
    if math.isfinite(lam):
        beta = min(lam, 1.0 - lam)
        num = beta * math.log(p ** (1.0 - lam) * (1.0 - p) ** lam / delta)
        den = lam * (1.0 - (1.0 - k * k * e1sq) ** beta)
        entries.append(BoundEntry.make("ldp_upper_fidelity_interp", UPPER, _ratio(num, den), True))

    entries.append(BoundEntry.make(
        "ldp_lower_hellinger", LOWER, _ratio(inv_k * math.log(2.5) / 2.0, h_half),
        half and delta <= 0.1 and h_half <= 1.0))
    entries.append(BoundEntry.make(
        "ldp_lower_chi2", LOWER, _ratio((1.0 - 2.0 * delta) ** 2, chi * e1sq), half and delta < 0.5))
    entries.append(BoundEntry.make(
        "ldp_lower_chi2_tenth", LOWER, _ratio(16.0 / 25.0, chi * e1sq), half and delta <= 0.1))

    js_ok = small_prior and delta <= quarter
    entries.append(BoundEntry.make(
        "ldp_lower_js", LOWER, _ratio(3.0 / 16.0 * inv_k * p * math.log(1.0 / p), js), js_ok))
    if math.isfinite(lam):
        h_int = integral_hellinger(rho, sigma, 1.0 - lam, cfg).H.value
        entries.append(BoundEntry.make(
            "ldp_lower_js_hellinger", LOWER, _ratio(JS_HELLINGER_PROVEN * inv_k * ln2, lam * h_int), js_ok))
        entries.append(BoundEntry.make(
            "ldp_lower_js_hellinger_unproven", LOWER,
            _ratio(JS_HELLINGER_UNPROVEN * inv_k * ln2, lam * h_int), False,
            note="constant 3*sqrt(2)/16 is not implied by the JS chain, which supports 3*sqrt(2)/64"))

    gap = (1.0 - delta / p) ** 2 if delta < p else math.nan
    general_ok = small_prior and delta < p
    entries.append(BoundEntry.make(
        "ldp_lower_chi2_general_p", LOWER, _ratio(gap, lin * e1sq),
        general_ok and epsilon <= ln2,
        note="(e^eps-1) unsquared; implied by the squared form only for eps <= ln 2"))
    entries.append(BoundEntry.make(
        "ldp_lower_chi2_general_p_squared", LOWER, _ratio(gap, chi * e1sq), general_ok))

    flags = []
    if epsilon == 0.0:
        flags.append("degenerate_privacy")
    if e1 <= 0.0:
        flags.append("degenerate_inputs")
    params = {"trace_distance": e1, "hellinger_half": h_half, "js": js, "lambda": lam,
              "contraction": k}
    return BoundsCertificate(p, delta, epsilon, tuple(entries), tuple(flags), params)


def hellinger_half_upper(dmax_forward: float, dmax_backward: float, e1: float) -> float:
    """Upper bound on H_1/2 from E_1 and the max-relative entropies in both directions."""
    def term(d):
        if not math.isfinite(d):
            return 1.0
        if d <= 0.0:
            return 0.0
        return math.expm1(d / 2.0) ** 2 / math.expm1(d)
    return (term(dmax_forward) + term(dmax_backward)) * e1


class ConversionBracket(NamedTuple):
    p: float
    delta_for_lower: float  # n*_B(p, delta_for_lower) <= n*_PF(alpha, beta)
    delta_for_upper: float  # n*_PF(alpha, beta) <= n*_B(p, delta_for_upper)
    entries: tuple


def symmetric_asymmetric_conversions(alpha: float, beta: float) -> ConversionBracket:
    """Bayesian settings that sandwich the prior-free complexity at (alpha, beta)."""
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise RangeViolation("alpha and beta must lie in (0, 1)")
    p = beta / (alpha + beta)
    d_up = alpha * beta / (alpha + beta)
    d_lo = 2.0 * d_up
    constant_regime = alpha <= 0.125 and beta <= 0.125 and beta <= alpha
    entries = (
        BoundEntry("bayes_at_double_delta", LOWER, math.nan, None, True, False,
                   f"n*_B(p={p:.6g}, delta={d_lo:.6g}) <= n*_PF"),
        BoundEntry("bayes_at_delta", UPPER, math.nan, None, True, False,
                   f"n*_PF <= n*_B(p={p:.6g}, delta={d_up:.6g})"),
        BoundEntry("bayes_equivalence", UPPER, math.nan, None, constant_regime, True,
                   "n*_PF ~ n*_B(p, delta) up to a universal constant"),
    )
    return ConversionBracket(p, d_lo, d_up, entries)


class PriorFreeTargets(NamedTuple):
    type1_for_lower: float
    type2_for_lower: float
    type1_for_upper: float
    type2_for_upper: float
    entries: tuple


def bayes_to_prior_free(p: float, delta: float) -> PriorFreeTargets:
    """Prior-free targets sandwiching n*_B(p, delta).

    ``n*_PF(delta/p, delta/(1-p)) <= n*_B(p, delta) <= n*_PF(delta/(2p), delta/(2(1-p)))``.
    """
    _check_prior(p, delta)
    constant_regime = p <= 0.5 and delta <= p / 4.0
    entries = (
        BoundEntry("prior_free_loose", LOWER, math.nan, None, True, False,
                   "n*_PF(delta/p, delta/(1-p)) <= n*_B"),
        BoundEntry("prior_free_tight", UPPER, math.nan, None, True, False,
                   "n*_B <= n*_PF(delta/(2p), delta/(2(1-p)))"),
        BoundEntry("prior_free_equivalence", UPPER, math.nan, None, constant_regime, True,
                   "n*_B ~ n*_PF(delta/p, delta/(1-p)) up to a universal constant"),
    )
    return PriorFreeTargets(delta / p, delta / (1.0 - p), delta / (2.0 * p), delta / (2.0 * (1.0 - p)), entries)


def majority_error(r: int, alpha: float) -> float:
    """P(Binomial(r, alpha) >= ceil(r/2)): majority vote of r tests each wrong w.p. alpha."""
    return float(binom.sf(math.ceil(r / 2) - 1, r, alpha))


class BoostResult(NamedTuple):
    r_bound: int
    r_odd: int
    exact_error: dict


def majority_boost(alpha: float, alpha_target: float, extra=()) -> BoostResult:
    """Repetitions sufficient to push a per-batch error alpha down to alpha_target."""
    if not (0.0 < alpha <= 0.25):
        raise RangeViolation(f"per-batch error must lie in (0, 1/4], got {alpha}")
    if not (0.0 < alpha_target <= alpha):
        raise RangeViolation("target error must lie in (0, alpha]")
    r = ceil_count(32.0 * math.log(1.0 / alpha_target) / math.log(1.0 / alpha))
    r_odd = r if r % 2 == 1 else r + 1
    rs = sorted({1, r_odd, *extra})
    return BoostResult(r, r_odd, {k: majority_error(k, alpha) for k in rs})


def asymmetric_ldp_bounds(rho, sigma, alpha: float, beta: float, epsilon: float) -> BoundsCertificate:
    """Order-of-magnitude bracket on the private prior-free sample complexity."""
    if not (0.0 < alpha <= 0.125 and 0.0 < beta <= 0.125):
        raise RangeViolation("alpha and beta must lie in (0, 1/8]")
    e1 = hockey_stick(rho, sigma, 1.0).value
    k, _, lin = privacy_factors(epsilon)
    inv_k = 1.0 / k if k > 0 else math.inf
    e1sq = e1 * e1
    entries = (
        BoundEntry.make("asym_ldp_lower", LOWER, _ratio((1.0 - alpha) ** 2, lin * e1sq), True, True),
        BoundEntry.make("asym_ldp_upper", UPPER,
                        _ratio(inv_k**2 * math.log((alpha + beta) / (alpha * beta)), e1sq), True, True),
    )
    flags = ("degenerate_inputs",) if e1 <= 0 else ()
    p = beta / (alpha + beta)
    return BoundsCertificate(p, alpha * beta / (alpha + beta), epsilon, entries, flags,
                             {"alpha": alpha, "beta": beta, "trace_distance": e1})
