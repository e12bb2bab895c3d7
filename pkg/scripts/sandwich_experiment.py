"""How tight are the certified brackets around the exact sample complexity?

For random qubit pairs, compares the best usable lower and upper bounds
with the oracle value: the Helstrom n* without privacy, and the binary
mechanism witness under eps-LDP. Reports violations (should be zero) and
the spread of upper/n* and n*/lower.

    python3 scripts/sandwich_experiment.py --trials 100 --seed 0
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from qldp import bounds, oracle, random_density
from qldp.divergences import trace_distance


@dataclass
class SandwichConfig:
    trials: int = 100
    seed: int = 0
    p: float = 0.5
    delta: float = 0.1
    epsilon: float = math.log(3.0)
    n_max: int = 10
    min_e1: float = 0.5


def sample_pairs(cfg: SandwichConfig):
    rng = np.random.default_rng(cfg.seed)
    while True:
        rho = random_density(2, int(rng.integers(1, 3)), rng)
        sigma = random_density(2, int(rng.integers(1, 3)), rng)
        if trace_distance(rho, sigma) >= cfg.min_e1:
            yield rho, sigma


def _ratios(n, cert):
    lo, hi = cert.best_lower(), cert.best_upper()
    viol = sum(e.raw > n for e in cert.lowers()) + sum(n > e.n for e in cert.uppers())
    lo_ratio = n / lo.raw if lo is not None and lo.raw > 0 else math.nan
    hi_ratio = hi.n / n if hi is not None else math.nan
    return viol, lo_ratio, hi_ratio


def run(cfg: SandwichConfig):
    plain, private = [], []
    pairs = sample_pairs(cfg)
    while len(plain) < cfg.trials:
        rho, sigma = next(pairs)
        res = oracle.quantum_sample_complexity(rho, sigma, cfg.p, cfg.delta, cfg.n_max)
        if not res.found:
            continue
        plain.append(_ratios(res.n_star, bounds.unconstrained_certificate(rho, sigma, cfg.p, cfg.delta)))
        wit = oracle.ldp_witness(rho, sigma, cfg.p, cfg.delta, cfg.epsilon)
        if wit.found:
            cert = bounds.ldp_sc_bounds(rho, sigma, cfg.p, cfg.delta, cfg.epsilon)
            # the witness is achievable, so only the lower bounds must sit below it
            viol = sum(e.raw > wit.n_star for e in cert.lowers())
            lo = cert.best_lower()
            hi = cert.best_upper()
            private.append((viol, wit.n_star / lo.raw if lo and lo.raw > 0 else math.nan,
                            hi.n / wit.n_star if hi else math.nan))
    return np.array(plain, dtype=float), np.array(private, dtype=float)


def summarize(label, arr):
    if not len(arr):
        print(f"{label}: no cases")
        return
    q = lambda col: np.nanpercentile(arr[:, col], [5, 50, 95])
    print(f"{label}: cases={len(arr)} violations={int(arr[:, 0].sum())}")
    print(f"  n/lower  p5 {q(1)[0]:7.2f}  median {q(1)[1]:7.2f}  p95 {q(1)[2]:7.2f}")
    print(f"  upper/n  p5 {q(2)[0]:7.2f}  median {q(2)[1]:7.2f}  p95 {q(2)[2]:7.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epsilon", type=float, default=math.log(3.0))
    args = ap.parse_args()
    cfg = SandwichConfig(trials=args.trials, seed=args.seed, epsilon=args.epsilon)
    plain, private = run(cfg)
    summarize("no privacy (Helstrom n*)", plain)
    summarize(f"eps={cfg.epsilon:.3g} (mechanism witness)", private)
    return int(plain[:, 0].sum() + (private[:, 0].sum() if len(private) else 0) > 0)


if __name__ == "__main__":
    raise SystemExit(main())
