"""Command-line interface: ``qldp {divergence,bounds,oracle,verify,sweep}``.

Exit codes: 0 success, 1 failed check or numerical failure, 2 usage or
input error.  JSON reports encode non-finite numbers as the strings
"inf", "-inf" and "nan"; every other float is written with full precision.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import sys
from dataclasses import dataclass

from . import bounds, divergences, oracle, verify
from .errors import (
    AlphaOutOfRange,
    DimCapExceeded,
    DimensionMismatch,
    ParseError,
    QldpError,
    RangeViolation,
    ValidationError,
)
from .io import jsonable, load_channel, load_state
from .ldp import apply_channel
from .linalg import DensityMatrix

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SWEEP_COLUMNS = ("epsilon", "lower_hellinger", "lower_chi2", "lower_js",
                 "upper_achievability", "upper_general", "witness_n", "best_lower_tag")

DIVERGENCE_KINDS = ("E_gamma", "trace_distance", "fidelity", "bures", "H_alpha", "petz",
                    "sandwiched", "chi2", "relative_entropy", "js", "d_max")


class UsageError(Exception):
    pass


# formatting

def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if x is None:
        return ""
    return str(x)


def _table(headers, rows) -> str:
    cells = [[_fmt(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return "\n".join([line(headers), line(["-" * w for w in widths])] + [line(r) for r in cells])


def _csv(headers, rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    for r in rows:
        w.writerow([_fmt(c) for c in r])
    return buf.getvalue().rstrip("\n")


@dataclass
class Report:
    """A command result: JSON payload plus a tabular view."""
    payload: dict
    headers: tuple
    rows: list
    preamble: str = ""
    status: int = EXIT_OK

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(jsonable(self.payload), indent=2)
        if fmt == "csv":
            return _csv(self.headers, self.rows)
        text = _table(self.headers, self.rows)
        return f"{self.preamble}\n{text}" if self.preamble else text


# commands

def cmd_divergence(a, b, kind: str, gamma=None, alpha=None, p=None) -> Report:
    params = {}
    if kind == "E_gamma":
        gamma = 1.0 if gamma is None else gamma
        params["gamma"] = gamma
        res = divergences.hockey_stick(a, b, gamma)
    elif kind == "trace_distance":
        res = divergences.hockey_stick(a, b, 1.0)
    elif kind == "fidelity":
        res = divergences.fidelity(a, b)
    elif kind == "bures":
        res = divergences.bures_distance(a, b)
    elif kind == "H_alpha":
        alpha = _need(alpha, "--alpha", kind)
        params["alpha"] = alpha
        res = divergences.integral_hellinger(a, b, alpha).H
    elif kind == "petz":
        alpha = _need(alpha, "--alpha", kind)
        params["alpha"] = alpha
        q = divergences.petz_quantities(a, b, alpha)
        res = divergences.DivergenceValue(q.D, 0.0, divergences.CLOSED_FORM)
    elif kind == "sandwiched":
        alpha = _need(alpha, "--alpha", kind)
        params["alpha"] = alpha
        res = divergences.sandwiched_renyi(a, b, alpha)
    elif kind == "chi2":
        res = divergences.chi_squared(a, b)
    elif kind == "relative_entropy":
        res = divergences.relative_entropy(a, b)
    elif kind == "js":
        p = 0.5 if p is None else p
        params["p"] = p
        res = divergences.jensen_shannon(a, b, p)
    elif kind == "d_max":
        res = divergences.max_relative_entropy(a, b)
    else:
        raise UsageError(f"unknown divergence kind {kind!r}")
    payload = {"kind": kind, "params": params, "value": res.value,
               "abs_error_estimate": res.abs_error_estimate, "method": res.method}
    return Report(payload, ("kind", "value", "abs_error_estimate", "method"),
                  [(kind, res.value, res.abs_error_estimate, res.method)])


def _need(value, flag, kind):
    if value is None:
        raise UsageError(f"--kind {kind} requires {flag}")
    return value


def _oracle_dict(res: oracle.OracleResult) -> dict:
    return {"n_star": res.n_star if res.found else None,
            "cap_exceeded": None if res.found else res.n_star.n_max,
            "method": res.method,
            "error_trace": {str(k): v for k, v in res.error_trace.items()}}


def _n_label(res: oracle.OracleResult):
    return res.n_star if res.found else str(res.n_star)


def cmd_bounds(a, b, p: float, delta: float, epsilon=None, n_max=oracle.BINARY_N_CAP) -> Report:
    if epsilon is None:
        cert = bounds.unconstrained_certificate(a, b, p, delta)
        witness = None
    else:
        cert = bounds.ldp_sc_bounds(a, b, p, delta, epsilon)
        witness = oracle.ldp_witness(a, b, p, delta, epsilon, n_max)
    rows = [(e.name, e.side, e.raw, e.n if e.n is not None else math.inf,
             "yes" if e.assumptions_met else "no",
             "yes" if e.up_to_universal_constant else "no") for e in cert.entries]
    payload = {"certificate": cert.to_dict()}
    if witness is not None:
        payload["witness"] = _oracle_dict(witness)
        rows.append(("ldp_witness", "witness", math.nan, _n_label(witness), "yes", "no"))
    pre = f"p={p} delta={delta} epsilon={'none' if epsilon is None else epsilon}"
    if cert.flags:
        pre += "  flags: " + ", ".join(cert.flags)
    return Report(payload, ("bound", "side", "raw", "n", "regime_ok", "constant"), rows, pre)


def cmd_oracle(a, b, p: float, delta: float, n_max: int, epsilon=None, alpha=None, beta=None) -> Report:
    res = oracle.quantum_sample_complexity(a, b, p, delta, n_max)
    payload = {"bayes": _oracle_dict(res)}
    rows = [("bayes", n, err) for n, err in res.error_trace.items()]
    rows.append(("bayes", _n_label(res), "n_star"))
    if epsilon is not None:
        wit = oracle.ldp_witness(a, b, p, delta, epsilon)
        payload["witness"] = _oracle_dict(wit)
        rows.append(("ldp_witness", _n_label(wit), "n_star"))
    if alpha is not None and beta is not None:
        np_res = oracle.neyman_pearson_scan(a, b, alpha, beta, n_max)
        payload["prior_free"] = _oracle_dict(np_res)
        rows += [("prior_free", n, err) for n, err in np_res.error_trace.items()]
        rows.append(("prior_free", _n_label(np_res), "n_star"))
    return Report(payload, ("route", "n", "error"), rows, f"p={p} delta={delta} n_max={n_max}")


def cmd_verify(seed: int, trials: int, names=None) -> Report:
    if trials < 1:
        raise UsageError("--trials must be at least 1")
    results = verify.run_checks(verify.VerifyConfig(seed, trials), names)
    rows = [(r.name, "pass" if r.passed else "FAIL", r.cases, r.failures, r.worst, r.detail) for r in results]
    ok = all(r.passed for r in results)
    payload = {"seed": seed, "trials": trials, "passed": ok,
               "checks": [{"name": r.name, "passed": r.passed, "cases": r.cases,
                           "failures": r.failures, "worst": r.worst, "detail": r.detail} for r in results]}
    n_fail = sum(not r.passed for r in results)
    pre = f"{len(results) - n_fail}/{len(results)} checks passed (seed {seed}, trials {trials})"
    return Report(payload, ("check", "status", "cases", "failures", "worst", "detail"), rows, pre,
                  EXIT_OK if ok else EXIT_FAIL)


def sweep_row(a, b, p: float, delta: float, epsilon: float, n_max=oracle.BINARY_N_CAP) -> dict:
    cert = bounds.ldp_sc_bounds(a, b, p, delta, epsilon)
    usable = {e.name: e.raw for e in cert.entries if e.usable}
    nan = math.nan

    def best(names, pick):
        vals = [usable[n] for n in names if n in usable]
        return pick(vals) if vals else nan

    lowers = {
        "hellinger": best(["ldp_lower_hellinger"], max),
        "chi2": best(["ldp_lower_chi2", "ldp_lower_chi2_tenth", "ldp_lower_chi2_general_p_squared"], max),
        "js": best(["ldp_lower_js", "ldp_lower_js_hellinger"], max),
    }
    wit = oracle.ldp_witness(a, b, p, delta, epsilon, n_max)
    finite = {k: v for k, v in lowers.items() if not math.isnan(v)}
    if "degenerate_inputs" in cert.flags:
        tag = "degenerate_inputs"
    elif finite:
        tag = max(finite, key=finite.get)
    else:
        tag = "none"
    return {
        "epsilon": epsilon,
        "lower_hellinger": lowers["hellinger"],
        "lower_chi2": lowers["chi2"],
        "lower_js": lowers["js"],
        "upper_achievability": best(["ldp_upper_e1_ln5", "ldp_upper_e1"], min),
        "upper_general": best(["ldp_upper_fidelity_interp"], min),
        "witness_n": wit.n_star if wit.found else math.inf,
        "best_lower_tag": tag,
        "flags": list(cert.flags),
    }


def cmd_sweep(a, b, p: float, delta: float, grid, n_max=oracle.BINARY_N_CAP) -> Report:
    grid = [float(e) for e in grid]
    if not grid:
        raise UsageError("epsilon grid is empty")
    if any(y <= x for x, y in zip(grid, grid[1:])):
        raise UsageError("epsilon grid must be strictly increasing")
    rows = [sweep_row(a, b, p, delta, e, n_max) for e in grid]
    flags = sorted({f for r in rows for f in r["flags"]})
    payload = {"p": p, "delta": delta, "columns": list(SWEEP_COLUMNS), "rows": rows, "flags": flags}
    table_rows = [[r[c] for c in SWEEP_COLUMNS] for r in rows]
    pre = f"p={p} delta={delta}" + (f"  flags: {', '.join(flags)}" if flags else "")
    return Report(payload, SWEEP_COLUMNS, table_rows, pre)


# parsing

def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (inclusive of stop up to rounding)."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(max(count, 0))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon grid {text!r}; use a,b,c or start:stop:step") from None


def _positive_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default=None)
    common.add_argument("--out", help="write the report here instead of stdout")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("state_a", help="state JSON file for rho (prior p)")
    pair.add_argument("state_b", help="state JSON file for sigma (prior 1-p)")
    pair.add_argument("--channel", help="channel JSON file applied to both states first")

    prior = argparse.ArgumentParser(add_help=False)
    prior.add_argument("--p", type=float, default=0.5, help="prior of the first state")
    prior.add_argument("--delta", type=float, default=0.1, help="target Bayes error")

    ap = argparse.ArgumentParser(prog="qldp", description="Divergences, sample-complexity bounds and "
                                 "exact oracles for private quantum hypothesis testing.")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("divergence", parents=[common, pair], help="evaluate one divergence")
    d.add_argument("--kind", choices=DIVERGENCE_KINDS, required=True)
    d.add_argument("--gamma", type=float)
    d.add_argument("--alpha", type=float)
    d.add_argument("--p", type=float, help="mixing weight for --kind js")

    b = sub.add_parser("bounds", parents=[common, pair, prior], help="sample-complexity certificate")
    b.add_argument("--epsilon", type=float, help="privacy level; omit for the unconstrained certificate")
    b.add_argument("--n-max", type=_positive_int, default=oracle.BINARY_N_CAP, help="witness search cap")

    o = sub.add_parser("oracle", parents=[common, pair, prior], help="exact sample complexity")
    o.add_argument("--n-max", type=_positive_int, default=12)
    o.add_argument("--epsilon", type=float, help="also report the binary-mechanism witness")
    o.add_argument("--alpha", type=float, help="type-I budget for the prior-free scan")
    o.add_argument("--beta", type=float, help="type-II budget for the prior-free scan")

    v = sub.add_parser("verify", parents=[common], help="run the property suite")
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--trials", type=_positive_int, default=verify.VerifyConfig.trials)
    v.add_argument("--check", action="append", choices=sorted(verify.REGISTRY), help="run only these checks")

    s = sub.add_parser("sweep", parents=[common, pair, prior], help="epsilon sweep as CSV")
    s.add_argument("--epsilon", type=parse_grid, default=parse_grid("0.1:5:0.1"),
                   help="grid as a,b,c or start:stop:step (default 0.1:5:0.1)")
    s.add_argument("--n-max", type=_positive_int, default=oracle.BINARY_N_CAP, help="witness search cap")
    return ap


def push_through(ch, a, b):
    """Channel outputs as states; measurement outcomes become diagonal states."""
    outs = []
    for x in (a, b):
        y = apply_channel(ch, x)
        outs.append(y if isinstance(y, DensityMatrix) else DensityMatrix.diag(y / y.sum()))
    return tuple(outs)


def run(args) -> Report:
    if args.command == "verify":
        return cmd_verify(args.seed, args.trials, args.check)
    a, b = load_state(args.state_a), load_state(args.state_b)
    if args.channel:
        a, b = push_through(load_channel(args.channel), a, b)
    if args.command == "divergence":
        return cmd_divergence(a, b, args.kind, args.gamma, args.alpha, args.p)
    if args.command == "bounds":
        return cmd_bounds(a, b, args.p, args.delta, args.epsilon, args.n_max)
    if args.command == "oracle":
        return cmd_oracle(a, b, args.p, args.delta, args.n_max, args.epsilon, args.alpha, args.beta)
    return cmd_sweep(a, b, args.p, args.delta, args.epsilon, args.n_max)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = run(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ParseError, ValidationError, RangeViolation, AlphaOutOfRange, DimensionMismatch,
            DimCapExceeded) as exc:
        print(f"qldp: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QldpError as exc:
        print(f"qldp: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"qldp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("csv" if args.command == "sweep" else "table")
    text = report.render(fmt) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
