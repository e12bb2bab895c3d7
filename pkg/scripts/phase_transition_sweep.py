"""Where does the best private lower bound switch from E_1-type to Hellinger-type?

Sweeps the privacy level for a few fixed pairs and reports, per pair, the
epsilon at which the winning lower bound changes family, alongside the
binary-mechanism witness.

    python3 scripts/phase_transition_sweep.py --out sweep.csv
"""

import argparse
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from qldp import DensityMatrix
from qldp.cli import SWEEP_COLUMNS, sweep_row


@dataclass
class SweepConfig:
    p: float = 0.5
    delta: float = 0.1
    eps_lo: float = 0.1
    eps_hi: float = 5.0
    eps_step: float = 0.1
    pairs: dict = field(default_factory=lambda: {
        "near_pure": (DensityMatrix.diag([0.95, 0.05]), DensityMatrix.diag([1.0, 0.0])),
        "symmetric": (DensityMatrix.diag([0.9, 0.1]), DensityMatrix.diag([0.1, 0.9])),
        "weak": (DensityMatrix.diag([0.6, 0.4]), DensityMatrix.diag([0.4, 0.6])),
    })

    def grid(self):
        n = int(round((self.eps_hi - self.eps_lo) / self.eps_step)) + 1
        return np.round(self.eps_lo + self.eps_step * np.arange(n), 10)


def run(cfg: SweepConfig):
    out = []
    for name, (rho, sigma) in cfg.pairs.items():
        for eps in cfg.grid():
            row = sweep_row(rho, sigma, cfg.p, cfg.delta, float(eps))
            out.append({"pair": name, **row})
    return out


def crossovers(rows):
    found = {}
    for a, b in zip(rows, rows[1:]):
        if a["pair"] == b["pair"] and a["best_lower_tag"] != b["best_lower_tag"]:
            found.setdefault(a["pair"], []).append((a["epsilon"], a["best_lower_tag"], b["best_lower_tag"]))
    return found


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--eps-hi", type=float, default=5.0)
    ap.add_argument("--out", help="write all rows as CSV")
    args = ap.parse_args()
    cfg = SweepConfig(p=args.p, delta=args.delta, eps_hi=args.eps_hi)
    rows = run(cfg)

    for pair, sw in crossovers(rows).items():
        for eps, a, b in sw:
            print(f"{pair:10s} {a} -> {b} between eps={eps:g} and eps={eps + cfg.eps_step:g}")
    print(f"{'pair':10s} {'eps':>5s} {'best':>10s} {'lower':>10s} {'witness':>8s} {'upper':>10s}")
    for r in rows:
        if abs(r["epsilon"] * 2 - round(r["epsilon"] * 2)) > 1e-9:
            continue  # print every half unit
        best = max((r[c] for c in ("lower_hellinger", "lower_chi2", "lower_js") if not math.isnan(r[c])),
                   default=math.nan)
        print(f"{r['pair']:10s} {r['epsilon']:5.1f} {r['best_lower_tag']:>10s} {best:10.3f} "
              f"{r['witness_n']:>8} {r['upper_achievability']:10.1f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("pair",) + SWEEP_COLUMNS)
            for r in rows:
                w.writerow([r["pair"]] + [";".join(r[c]) if c == "flags" else r[c] for c in SWEEP_COLUMNS])


if __name__ == "__main__":
    main()
