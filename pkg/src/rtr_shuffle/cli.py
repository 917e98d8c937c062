"""Command line front end: ``rtr-shuffle <subcommand> [flags]``.

Exit status is 0 on success, 1 when ``verify`` finds a failing criterion and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import acceptance, chains, coupling, montecarlo, tv_exact
from .deck import identity, parse_deck, parse_path
from .errors import NumericalError, ResourceError, UsageError
from .rng import ALGORITHM


def _num(x: Any) -> Any:
    """Round floats to 12 significant digits; infinities become ``"inf"``."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return float(f"{float(x):.12g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "" if math.isinf(x) else f"{float(x):.12g}"
    return str(x)


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "format"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    if "variant" in cfg:
        cfg["queue_membership"] = cfg.pop("membership", "self-exclusive")
        cfg["good_time_rule"] = cfg.pop("variant")
    cfg["rng"] = ALGORITHM
    return cfg


def _variant(args) -> coupling.CouplingVariant:
    return coupling.CouplingVariant(args.variant, args.membership.replace("-", "_"))


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("values must be non-negative")
    return vals


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _matrix_csv(M: np.ndarray) -> str:
    return _csv(["from"] + chains.STATE_LABELS,
                [[chains.STATE_LABELS[r]] + list(M[r]) for r in range(M.shape[0])])


def cmd_eig(args) -> tuple[str, int]:
    if args.limit:
        M, label = chains.build_C(), "C"
    elif args.n is None:
        raise UsageError("eig needs --limit or --n")
    elif args.form == "stochastic":
        M, label = chains.build_Ktilde(args.n), "Ktilde_n"
    else:
        M, label = chains.scaled_generator(args.n), "n*B_n"
    if args.format == "csv":
        return _matrix_csv(M), 0
    rep = chains.eigen_report(M)
    if rep.agreement > 1e-8:
        raise NumericalError(f"eigenvalue methods disagree by {rep.agreement:.3e}")
    out = {"config": _config(args), "matrix": label, **rep.to_json(),
           "threshold": -chains.CONSTANTS.a,
           "below_threshold": rep.value < -chains.CONSTANTS.a if rep.kind == "generator" else None,
           "entries": M.tolist(), "states": chains.STATE_LABELS}
    if not args.limit:
        diag = chains.l2_diagnostic(args.n, 1000)
        out["l2_sup_ratio"] = diag.sup_ratio
        out["l2_sup_at_k"] = diag.argmax_k
        out["cauchy_schwarz_ok"] = diag.cauchy_schwarz_ok
        if args.form == "generator":
            out["limit_error"] = chains.verify_limit(args.n)
    return json.dumps(_num(out), indent=2), 0


def cmd_bound(args) -> tuple[str, int]:
    t = chains.mixing_bound(args.n, args.eps)
    out = {"config": _config(args), "t_star": t,
           "analytic_bound_at_t_star": chains.path_coupling_bound(args.n, t),
           "c_mix_times_n_log_n": chains.CONSTANTS.c_mix * args.n * math.log(args.n) if args.n > 1 else 0.0}
    if args.k is not None:
        out["survival_bound"] = chains.survival_bound(args.n, args.k[0])
    if args.format == "csv":
        return _csv(["n", "eps", "t_star", "analytic_bound_at_t_star"],
                    [[args.n, args.eps, t, out["analytic_bound_at_t_star"]]]), 0
    return json.dumps(_num(out), indent=2), 0


def cmd_tv(args) -> tuple[str, int]:
    d = tv_exact.d_curve(args.n, args.t_max)
    adj = tv_exact.adjacent_curve(args.n, args.t_max) if args.n >= 2 else [math.nan] * len(d)
    if args.format == "json":
        return json.dumps(_num({"config": _config(args), "t": list(range(args.t_max + 1)),
                                "d_exact": d, "adjacent_tv": adj}), indent=2), 0
    return _csv(["t", "d_exact", "adjacent_tv"], [[t, d[t], adj[t]] for t in range(len(d))]), 0


def cmd_couple(args) -> tuple[str, int]:
    v = _variant(args)
    if args.path is not None:
        path = parse_path(args.path)
        deck = parse_deck(args.deck) if args.deck else identity(args.n)
        pair = coupling.SpecialPair(args.i, args.j)
        res = coupling.run_coupled(deck, pair, path, v)
        return json.dumps(_num({"config": _config(args), **res.to_json()}), indent=2), 0
    ks = args.k or [4 * args.n]
    if len(ks) > 1 or args.format == "csv":
        rows = montecarlo.coupling_bound_curve(args.n, ks, args.samples, args.seed, v, args.threads)
        if args.format == "json":
            return json.dumps(_num({"config": _config(args), "rows": [
                {"k": r.k, "empirical": r.empirical, "analytic": r.analytic, **r.estimate.to_json()}
                for r in rows]}), indent=2), 0
        return _csv(["k", "empirical_bound", "analytic_bound", "p_hat", "ci_lo", "ci_hi"],
                    [[r.k, r.empirical, r.analytic, r.estimate.point, r.estimate.lo, r.estimate.hi]
                     for r in rows]), 0
    k = ks[0]
    tail = montecarlo.estimate_T_tail(args.n, k, args.samples, args.seed, v, args.threads)
    nc = montecarlo.estimate_noncoalescence(args.n, k, args.samples, args.seed, v, args.threads)
    out = {"config": _config(args), "T_tail": tail.to_json(),
           "survival_bound": chains.survival_bound(args.n, k), **nc.to_json()}
    return json.dumps(_num(out), indent=2), 0


def cmd_queue_stats(args) -> tuple[str, int]:
    rows = montecarlo.queue_transition_stats(args.n, args.steps, args.seed, args.membership.replace("-", "_"))
    header = ["l", "visits", "q_hat", "q", "p_hat", "p", "reset_hat", "reset", "z_q", "z_p", "z_reset"]
    table = [[getattr(r, h) for h in header] for r in rows]
    if args.format == "csv":
        return _csv(header, table), 0
    return json.dumps(_num({"config": _config(args), "rows": [dict(zip(header, t)) for t in table]}), indent=2), 0


def cmd_dominance(args) -> tuple[str, int]:
    rep = chains.dominance_check(args.n, args.t_max, args.samples, args.seed)
    return json.dumps(_num({"config": _config(args), **rep.to_json()}), indent=2), 0


def cmd_verify(args) -> tuple[str, int]:
    echo = (lambda line: print(line, file=sys.stderr, flush=True)) if args.out else (lambda line: print(line, flush=True))
    results = acceptance.run_all(args.quick, args.seed, args.threads, echo=echo)
    failed = [c for c in results if not c.passed]
    summary = {"config": _config(args), "passed": len(results) - len(failed), "failed": len(failed),
               "criteria": [{"number": c.number, "name": c.name, "passed": c.passed,
                             "seconds": c.seconds, "details": c.details} for c in results]}
    text = json.dumps(_num(summary), indent=2, default=str) if args.out else \
        f"{len(results) - len(failed)}/{len(results)} criteria passed"
    return text, 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtr-shuffle", description="Random-to-random insertion shuffle laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json"):
        p.add_argument("--format", choices=["json", "csv"], default=fmt)
        p.add_argument("--out", help="write the report here instead of stdout")

    def seeded(p, samples=10**4):
        p.add_argument("--samples", type=_positive, default=samples)
        p.add_argument("--seed", type=_nonneg, default=0)
        p.add_argument("--threads", type=_positive, default=os.cpu_count() or 1)

    def variant(p):
        p.add_argument("--variant", choices=["strict", "amended"], default="amended")
        p.add_argument("--membership", choices=["literal", "self-exclusive"], default="self-exclusive")

    p = sub.add_parser("eig", help="second largest eigenvalue of the truncated chain or its limit")
    p.add_argument("--limit", action="store_true", help="use the limit matrix C")
    p.add_argument("--n", type=int)
    p.add_argument("--form", choices=["generator", "stochastic"], default="generator")
    common(p)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("bound", help="mixing-time bound from the decay constant")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k", type=_int_list)
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("tv", help="exact distance curves for small decks")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--t-max", type=_nonneg, required=True)
    common(p, fmt="csv")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("couple", help="coupled runs and coupling estimators")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_int_list, help="horizon, or a comma list for a bound curve")
    p.add_argument("--deck", help="start deck for a single run, e.g. 1,3,4,2")
    p.add_argument("--path", help="shuffle path for a single run, e.g. '1>1;1>4;2>3'")
    p.add_argument("--i", type=_positive, default=1)
    p.add_argument("--j", type=_positive, default=2)
    seeded(p)
    variant(p)
    common(p)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("queue-stats", help="queue-size transition frequencies")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--steps", type=_positive, default=10**6)
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--membership", choices=["literal", "self-exclusive"], default="self-exclusive")
    common(p)
    p.set_defaults(func=cmd_queue_stats)

    p = sub.add_parser("dominance", help="Monte Carlo Y against the exact truncated chain")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--t-max", type=_nonneg, default=200)
    seeded(p, samples=10**5)
    common(p)
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true", help="tenfold fewer Monte Carlo samples")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--threads", type=_positive, default=os.cpu_count() or 1)
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = args.func(args)
    except (UsageError, ResourceError) as exc:
        print(f"rtr-shuffle: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"rtr-shuffle: numerical error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text.rstrip("\n"))
    return code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
