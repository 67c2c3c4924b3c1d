"""Command-line interface: ``lassocompat <command> [options]``.

Commands: solve, compat, bounds, reproduce, coverage, list-designs.
Index sets given with ``--set`` are 1-based.  Exit codes: 0 success,
2 inadmissible input or solver failure, 3 failing scenarios.
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import gap_report
from .compat import compatibility, restricted_eigenvalue
from .designs import ALIASES, FAMILIES, PARAMS, DesignSpec, build_gram, load_spec
from .errors import LassoCompatError
from .gram import GramMatrix, factorize, read_matrix_csv
from .noisy import NoisyConfig, coverage
from .solver import ProblemInstance, solve_noiseless, uniqueness_probe

FMT = "%.17g"


# ---------------------------------------------------------------- helpers

def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FMT % (float(x) + 0.0)  # no negative zeros


def _emit(args, name, rows, header, summary):
    """Write ``name.csv`` and ``name.json`` to ``--out`` or print both to stdout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in r])
    js = json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(buf.getvalue())
        (out / f"{name}.json").write_text(js)
    else:
        sys.stdout.write(buf.getvalue())
        sys.stdout.write(js)


def _add_design_args(p):
    g = p.add_argument_group("design")
    g.add_argument("--design", help="family name or alias (see list-designs); 'identity' needs --p")
    g.add_argument("--gram-file", help="headerless CSV Gram matrix")
    g.add_argument("--spec-file", help='JSON design spec {"family": ..., "params": {...}}')
    g.add_argument("--rho", type=float)
    g.add_argument("--rhos", type=_floats)
    g.add_argument("--c", dest="C", type=float)
    g.add_argument("--cs", dest="Cs", type=_floats)
    g.add_argument("--tau2", type=float)
    g.add_argument("--tau2s", type=_floats)
    g.add_argument("--theta", type=float)
    g.add_argument("--gamma3", type=float)
    g.add_argument("--gamma", type=_floats)
    g.add_argument("--m0", type=int)
    g.add_argument("--p", type=int, help="dimension for the identity design")


def design_from_args(args):
    """Return ``(spec_or_None, GramMatrix)`` from the design flags."""
    if args.gram_file:
        G = GramMatrix(read_matrix_csv(args.gram_file))
        return DesignSpec("Custom", {"matrix": G.entries.tolist()}), G
    if args.spec_file:
        spec = load_spec(args.spec_file)
        return spec, build_gram(spec)
    if not args.design:
        raise SystemExit("one of --design, --gram-file or --spec-file is required")
    if args.design == "identity":
        if not args.p:
            raise SystemExit("--design identity needs --p")
        spec = DesignSpec("Custom", {"matrix": np.eye(args.p).tolist()})
        return spec, build_gram(spec)
    fam = ALIASES.get(args.design, args.design)
    if fam not in FAMILIES:
        raise SystemExit(f"unknown design {args.design!r}")
    params = {k: getattr(args, k) for k in PARAMS[fam] if getattr(args, k, None) is not None}
    spec = DesignSpec(fam, params)
    return spec, build_gram(spec)


def _set_arg(text, p):
    S = [int(x) - 1 for x in text.split(",") if x.strip()]
    if any(j < 0 or j >= p for j in S):
        raise SystemExit(f"--set entries must lie in 1..{p}")
    return S


# ---------------------------------------------------------------- commands

def cmd_list_designs(args):
    inv = {v: k for k, v in ALIASES.items()}
    for fam in FAMILIES:
        print(f"{fam:26s} alias={inv.get(fam, '-'):22s} params={','.join(PARAMS[fam])}")
    print(f"{'identity':26s} alias={'identity':22s} params=p")
    return 0


def cmd_solve(args):
    spec, G = design_from_args(args)
    inst = ProblemInstance(G, _floats(args.beta0), args.lam)
    sol = solve_noiseless(inst, tol=args.tol, max_iter=args.max_iter)
    summary = {
        "inputs": {"design": spec.to_dict() if spec else None, "beta0": inst.beta0, "lambda": inst.lam},
        "outputs": {"beta_star": sol.beta_star, "subgradient": sol.subgradient,
                    "kkt_residual": sol.kkt_residual, "iterations": sol.iterations,
                    "prediction_error": sol.prediction_error, "penalized_error": sol.penalized_value,
                    "objective": sol.objective},
        "pass": bool(sol.kkt_residual <= args.tol),
    }
    if not args.no_probe:
        verdict = uniqueness_probe(inst, tol=args.tol)
        summary["outputs"]["unique"] = verdict.unique
        if not verdict.unique:
            print("warning: non-unique minimizer (witnesses differ by "
                  f"{verdict.max_spread:.3g} with equal objective)", file=sys.stderr)
    rows = [(j + 1, b, z) for j, (b, z) in enumerate(zip(sol.beta_star, sol.subgradient))]
    _emit(args, "solve", rows, ["j", "beta_star", "subgradient"], summary)
    return 0


def cmd_compat(args):
    spec, G = design_from_args(args)
    S = _set_arg(args.set, G.p) if args.set else list(spec.active_set)
    rep = compatibility(G, S, args.L)
    kappa = restricted_eigenvalue(G, S) if args.re and S else None
    summary = {
        "inputs": {"design": spec.to_dict(), "set": [j + 1 for j in S], "L": args.L},
        "outputs": {"phi2": rep.value, "effective_sparsity": rep.effective_sparsity,
                    "restricted_eigenvalue_upper": kappa, "lambda_min": rep.lambda_min,
                    "lambda_max": rep.lambda_max, "certified": rep.certified},
        "pass": rep.certified,
    }
    rows = [(j + 1, b) for j, b in enumerate(rep.minimizer)]
    _emit(args, "compat", rows, ["j", "minimizer"], summary)
    return 0


def cmd_bounds(args):
    spec, G = design_from_args(args)
    inst = ProblemInstance(G, _floats(args.beta0), args.lam)
    known = spec is not None and spec.family != "Custom"
    rep = gap_report(inst, spec=spec if known else None)
    fields = ["u1", "u2", "u3", "exact_prediction_error", "exact_penalized_error",
              "basic_bound_l1", "basic_bound_compat", "phi2_S0"]
    rows = [(f, getattr(rep, f)) for f in fields]
    rows += [("gap_" + k, v) for k, v in rep.gaps.items()]
    summary = {
        "inputs": {"design": spec.to_dict(), "beta0": inst.beta0, "lambda": inst.lam},
        "outputs": {f: getattr(rep, f) for f in fields} | {
            "u2_argmin_set": [j + 1 for j in rep.u2_argmin_set],
            "u3_argmin_set": [j + 1 for j in rep.u3_argmin_set],
            "u3_relaxed": rep.u3_relaxed, "gaps": rep.gaps, "oracle_agrees": rep.oracle_agrees},
        "pass": bool(rep.exact_prediction_error <= min(rep.u1, rep.u2, rep.u3) + 1e-8),
    }
    _emit(args, "bounds", rows, ["quantity", "value"], summary)
    return 0


def cmd_reproduce(args):
    from .scenarios import load_catalog, run_scenario
    cat = load_catalog(args.catalog)
    if args.scenario == "all":
        ids = list(cat)
    elif args.scenario in cat:
        ids = [args.scenario]
    else:
        print(f"unknown scenario {args.scenario!r}; available: {', '.join(cat)}", file=sys.stderr)
        return 2
    results = [run_scenario(cat[i]) for i in ids]
    cols = ["exact", "oracle", "u1", "u2", "u3", "bound", "ratio"]
    rows = []
    for r in results:
        vals = [r.values.get(c, float("nan")) for c in cols]
        rows.append([r.id, r.kind] + vals + ["PASS" if r.passed else "FAIL"])
    summary = [{"scenario_id": r.id, "inputs": {"kind": r.kind, "claim": cat[r.id].claim},
                "outputs": r.values, "failures": list(r.failures), "pass": r.passed} for r in results]
    if not args.out:
        w = max(len(i) for i in ids)
        print(f"{'scenario':{w}s}  {'kind':8s} " + " ".join(f"{c:>12s}" for c in cols) + "  status")
        for row in rows:
            nums = " ".join(f"{float(v):12.6g}" for v in row[2:-1])
            print(f"{row[0]:{w}s}  {row[1]:8s} {nums}  {row[-1]}")
    else:
        _emit(args, "reproduce", rows, ["scenario", "kind"] + cols + ["status"], summary)
    failing = [r.id for r in results if not r.passed]
    if failing:
        print("failing scenarios: " + ", ".join(failing), file=sys.stderr)
        return 3
    return 0


def cmd_coverage(args):
    spec, G = design_from_args(args)
    beta0 = _floats(args.beta0) if args.beta0 else None
    if beta0 is None:
        beta0 = np.zeros(G.p)
        beta0[:2] = (1.0, 0.5)[:G.p]
    inst = ProblemInstance(G, beta0, args.lam)
    factor = factorize(G, args.n)
    cfg = NoisyConfig(n=args.n, lam=args.lam, eta=args.eta, alpha=args.alpha, alpha1=args.alpha1,
                      trials=args.trials, seed=args.seed, allow_violation=args.allow_violation,
                      sigma0=G if args.variant == "sigma0" else None)
    rep = coverage(inst, factor, cfg, variant=args.variant)
    rows = [(r.trial_index, r.lhs, r.rhs, r.violated, r.bias, r.prediction, r.xi, r.xi_condition)
            for r in rep.results]
    summary = {
        "inputs": {"design": spec.to_dict(), "beta0": inst.beta0, "lambda": args.lam, "n": args.n,
                   "eta": args.eta, "alpha": args.alpha, "alpha1": args.alpha1,
                   "trials": args.trials, "seed": args.seed, "variant": args.variant},
        "outputs": {"empirical_coverage": rep.empirical_coverage, "nominal": rep.nominal,
                    "violations": rep.violations, "mean_lhs": rep.mean_lhs, "mean_rhs": rep.mean_rhs,
                    "xi_condition_failures": rep.xi_condition_failures,
                    "precondition_holds": rep.precondition_holds, "lambda0": rep.lambda0},
        "pass": bool(rep.empirical_coverage >= rep.nominal),
    }
    _emit(args, "coverage", rows,
          ["trial", "lhs", "rhs", "violated", "bias", "prediction", "xi", "xi_condition"], summary)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="lassocompat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-designs", help="list design families and their parameters")
    p.set_defaults(func=cmd_list_designs)

    p = sub.add_parser("solve", help="solve the noiseless Lasso")
    _add_design_args(p)
    p.add_argument("--beta0", required=True, help="comma-separated true coefficients")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--no-probe", action="store_true", help="skip the uniqueness probe")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compat", help="compatibility constant of an index set")
    _add_design_args(p)
    p.add_argument("--set", help="1-based comma-separated set (default: the family's active set)")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--re", action="store_true", help="also estimate the restricted eigenvalue")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("bounds", help="upper bounds and exact errors")
    _add_design_args(p)
    p.add_argument("--beta0", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reproduce", help="run a named scenario or 'all'")
    p.add_argument("scenario")
    p.add_argument("--catalog", help="alternative scenario catalog (JSON)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("coverage", help="Monte Carlo coverage of the noisy bounds")
    _add_design_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta0")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--alpha1", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=["empirical", "sigma0"], default="empirical")
    p.add_argument("--allow-violation", action="store_true",
                   help="run even when eta*lambda <= lambda0 (reported in the summary)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LassoCompatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
