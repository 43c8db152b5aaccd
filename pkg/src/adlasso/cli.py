"""Command-line front end.

Subcommands: ``gen`` (write an instance), ``solve`` (solution + certificate
JSON), ``sweep`` (phase-transition CSV), ``verify`` (tail-bound CSV), and
``f1`` (tabular perturb-and-recover report).  Exit codes: 0 success,
1 runtime error, 2 usage error.  ``--config FILE`` supplies defaults that
explicit flags override; ``ADLASSO_SEED`` is the master-seed fallback.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io as adio
from .concentration import ClaimParams, default_delta_grid, verify_tail_bound
from .datagen import SyntheticConfig, generate_instance, load_tabular, sample_ground_truth
from .errors import AdlassoError, MissingCleanData
from .harness import SweepConfig, run_real_pipeline, run_sweep
from .lasso import SolverOptions, pdw_certificate, solve_lasso
from .rng import RngStream
from .theory import check_theorem1, compute_bundle, estimate_cross_covariance, lambda_scaled

_CLAIM_ALIASES = {
    "b2": "B2_spectral", "m1": "m1_indinf", "m2": "m2_inverse",
    "hessian": "min_eig_hessian", "xstar": "min_eig_xstar", "ex": "min_eig_ex",
    "prod": "prod_subgauss", "sum": "sum_subgauss",
}


class UsageError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    return cfg


def _resolve(args, config, key, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _resolve_seed(args, config):
    seed = _resolve(args, config, "seed", None)
    if seed is None:
        seed = os.environ.get("ADLASSO_SEED", 0)
    return int(seed)


def _parse_ratios(text):
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("--ratios expects start:stop:count or a comma list")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1 or stop < start:
            raise UsageError("bad --ratios range")
        return tuple(np.linspace(start, stop, count).tolist())
    return tuple(float(v) for v in text.split(","))


def _parse_lambda_policy(text):
    if text in (None, "twice", "twice_lower_bound"):
        return "twice_lower_bound", 2.0
    if text.startswith("fixed:"):
        return "fixed", float(text.split(":", 1)[1])
    if text.startswith("scaled:"):
        return "scaled", float(text.split(":", 1)[1])
    raise UsageError(f"unknown lambda policy {text!r}; "
                     "use twice | fixed:VALUE | scaled:C")


def cmd_gen(args):
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    p = int(_resolve(args, config, "p", 0))
    k = int(_resolve(args, config, "k", 0))
    n = int(_resolve(args, config, "n", 0))
    if not (1 <= k <= p):
        raise UsageError(f"need 1 <= k <= p, got k={k}, p={p}")
    if n < 1:
        raise UsageError(f"need n >= 1, got n={n}")
    syn = SyntheticConfig(
        p=p, k=k, n=n,
        sigma1=float(_resolve(args, config, "sigma1", 0.05)),
        sigma2=float(_resolve(args, config, "sigma2", 0.1)),
        mode=_resolve(args, config, "mode", "gaussian"),
        budget_r=float(_resolve(args, config, "r", 0.0)),
        mix_weight=float(_resolve(args, config, "mix_weight", 0.5)),
        seed=seed,
    )
    rng = RngStream(seed)
    truth = sample_ground_truth(syn.p, syn.k, rng.child(0))
    inst = generate_instance(truth, syn.corruption(), syn.n, rng.child(1))
    resolved = {"p": syn.p, "k": syn.k, "n": syn.n, "sigma1": syn.sigma1,
                "sigma2": syn.sigma2, "mode": syn.mode, "r": syn.budget_r,
                "mix_weight": syn.mix_weight, "seed": seed}
    adio.save_instance(args.out, inst, extra_config=resolved)
    print(f"gen: wrote instance ({syn.n} x {syn.p}, k={syn.k}, mode={syn.mode}) to {args.out}")
    return 0


def cmd_solve(args):
    config = _load_config(args.config)
    inst = adio.load_instance(args.instance)
    scale = float(_resolve(args, config, "scale", 2.0))
    lam_text = _resolve(args, config, "lam", "auto")
    policy = {"requested": str(lam_text)}
    if str(lam_text) == "auto":
        if inst.truth is not None:
            sigma_ex = None
            if inst.corruption.mode in ("correlated", "real_scaled_correlated") \
                    and inst.X_star is not None and inst.E_x is not None:
                sigma_ex, n_est = estimate_cross_covariance(inst)
                policy["sigma_ex_estimated_from_n"] = n_est
            bundle = compute_bundle(inst.truth, inst.corruption, sigma_ex, inst.n)
            if math.isfinite(bundle.lambda_lb) and bundle.lambda_lb > 0:
                lam = 2.0 * bundle.lambda_lb
                policy["policy"] = "twice_lower_bound"
            else:
                lam = lambda_scaled(inst.p, inst.n, scale)
                policy["policy"] = f"scaled:{scale}"
        else:
            lam = lambda_scaled(inst.p, inst.n, scale)
            policy["policy"] = f"scaled:{scale}"
    else:
        lam = float(lam_text)
        policy["policy"] = "fixed"
    if lam < 0:
        raise UsageError("lambda must be nonnegative")
    policy["lambda"] = lam

    opts = SolverOptions(support_tol=float(_resolve(args, config, "support_tol", 1e-6)))
    sol = solve_lasso(inst, lam, opts)
    if lam == 0.0:
        print("solve: lambda = 0, dual vector undefined", file=sys.stderr)

    cert = claim_report = bundle_out = None
    if inst.truth is not None and lam > 0:
        sigma_ex = None
        if inst.corruption.mode in ("correlated", "real_scaled_correlated") \
                and inst.X_star is not None and inst.E_x is not None:
            sigma_ex, _ = estimate_cross_covariance(inst)
        bundle_out = compute_bundle(inst.truth, inst.corruption, sigma_ex, inst.n)
        try:
            cert = pdw_certificate(inst, sol)
            claim_report = check_theorem1(inst, sol, cert, bundle_out, opts)
        except MissingCleanData as exc:
            print(f"solve: certificate skipped ({exc})", file=sys.stderr)
    payload = adio.solution_to_dict(sol, cert=cert, claim_report=claim_report,
                                    bundle=bundle_out, resolved_config=policy)
    adio.dump_json(args.out, payload)
    print(f"solve: lambda={lam:.6g}, |support|={len(sol.support_hat)}, "
          f"kkt={sol.kkt_residual:.2e} -> {args.out}")
    return 0


def cmd_sweep(args):
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    p_text = _resolve(args, config, "p", None)
    ratios_text = _resolve(args, config, "ratios", None)
    if p_text is None or ratios_text is None:
        raise UsageError("sweep needs --p and --ratios")
    policy, value = _parse_lambda_policy(_resolve(args, config, "lambda_policy", None))
    cfg = SweepConfig(
        p_list=tuple(int(v) for v in str(p_text).split(",")),
        k=int(_resolve(args, config, "k", 8)),
        ratio_grid=_parse_ratios(str(ratios_text)),
        trials=int(_resolve(args, config, "trials", 100)),
        mode=_resolve(args, config, "mode", "gaussian"),
        sigma1=float(_resolve(args, config, "sigma1", 0.05)),
        sigma2=float(_resolve(args, config, "sigma2", 0.1)),
        budget_r=float(_resolve(args, config, "r", 0.0)),
        mix_weight=float(_resolve(args, config, "mix_weight", 0.5)),
        lambda_policy=policy,
        lambda_value=value,
        master_seed=seed,
    )
    jobs = int(_resolve(args, config, "jobs", 0)) or os.cpu_count() or 1
    result = run_sweep(cfg, jobs=jobs)
    adio.write_sweep_csv(args.out, result.rows)
    manifest = {"config": {**cfg.__dict__, "p_list": list(cfg.p_list),
                           "ratio_grid": list(cfg.ratio_grid)},
                "jobs": jobs, "cells": len(result.rows)}
    adio.dump_json(args.out + ".manifest.json", manifest)
    for cell, tags in result.error_tags.items():
        print(f"sweep: cell {cell} had {len(tags)} trial errors", file=sys.stderr)
    print(f"sweep: wrote {len(result.rows)} cells to {args.out}")
    return 0


def cmd_verify(args):
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    claim = _resolve(args, config, "claim", None)
    if claim is None:
        raise UsageError("verify needs --claim")
    claim_id = _CLAIM_ALIASES.get(claim, claim)
    n = int(_resolve(args, config, "n", 500))
    p = int(_resolve(args, config, "p", max(2 * int(_resolve(args, config, "k", 5)), 10)))
    k = int(_resolve(args, config, "k", 5))
    trials = int(_resolve(args, config, "trials", 2000))
    params = ClaimParams(
        sigma=float(_resolve(args, config, "sigma", 1.0)),
        r=float(_resolve(args, config, "r", 1.0)),
        dependent=bool(_resolve(args, config, "dependent", False)),
    )
    deltas_text = _resolve(args, config, "deltas", None)
    if deltas_text is None:
        grid = default_delta_grid(claim_id, n, p, k, params)
    else:
        grid = _parse_ratios(str(deltas_text))
    report = verify_tail_bound(claim_id, n=n, p=p, k=k, trials=trials,
                               delta_grid=grid, rng=RngStream(seed), params=params)
    adio.write_tail_report_csv(args.out, report)
    manifest = {"claim": claim_id, "n": n, "p": p, "k": k, "trials": trials,
                "deltas": list(grid), "seed": seed, "violated": report.violated,
                "fitted_rate": report.fitted_rate,
                "window": list(report.window) if report.window else None}
    adio.dump_json(args.out + ".manifest.json", manifest)
    print(f"verify: {claim_id} violated={report.violated} -> {args.out}")
    return 0


def cmd_f1(args):
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    data_path = _resolve(args, config, "data", None)
    if data_path is None:
        raise UsageError("f1 needs --data")
    target = _resolve(args, config, "target", None)
    if target is None:
        raise UsageError("f1 needs --target (column name or 0-based index)")
    try:
        target = int(target)
    except (TypeError, ValueError):
        pass
    mode = str(_resolve(args, config, "mode", "gaussian_var")).replace("-", "_")
    data = load_tabular(data_path, target)
    report = run_real_pipeline(
        data, mode, RngStream(seed),
        noise_frac=float(_resolve(args, config, "noise_frac", 0.1)),
        budget_r=float(_resolve(args, config, "r", 0.0)),
        mix_weight=float(_resolve(args, config, "mix_weight", 0.5)),
        lambda_scale=float(_resolve(args, config, "lambda_scale", 2.0)),
    )
    report["seed"] = seed
    report["data"] = str(data_path)
    adio.dump_json(args.out, report)
    print(f"f1: {report['f1']:.4f} (|T|={len(report['true_support'])}, "
          f"|P|={len(report['perturbed_support'])}) -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="adlasso",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON defaults, overridden by flags")

    g = sub.add_parser("gen", parents=[common], help="generate and dump one instance")
    g.add_argument("--p", type=int, default=None)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--mode", default=None, choices=(
        "none", "gaussian", "mixture", "correlated",
        "real_scaled_mixture", "real_scaled_correlated"))
    g.add_argument("--sigma1", type=float, default=None)
    g.add_argument("--sigma2", type=float, default=None)
    g.add_argument("--r", type=float, default=None)
    g.add_argument("--mix-weight", dest="mix_weight", type=float, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="solve a dumped instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--lambda", dest="lam", default=None, help="auto or a value")
    s.add_argument("--scale", type=float, default=None,
                   help="c in the fallback lambda = c sqrt(log(p)/n)")
    s.add_argument("--support-tol", dest="support_tol", type=float, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", parents=[common], help="phase-transition sweep")
    w.add_argument("--p", default=None, help="comma list, e.g. 64,128")
    w.add_argument("--k", type=int, default=None)
    w.add_argument("--ratios", default=None,
                   help="start:stop:count (linear) or a comma list of n/log(p)")
    w.add_argument("--trials", type=int, default=None)
    w.add_argument("--mode", default=None)
    w.add_argument("--sigma1", type=float, default=None)
    w.add_argument("--sigma2", type=float, default=None)
    w.add_argument("--r", type=float, default=None)
    w.add_argument("--mix-weight", dest="mix_weight", type=float, default=None)
    w.add_argument("--lambda-policy", dest="lambda_policy", default=None,
                   help="twice | fixed:VALUE | scaled:C")
    w.add_argument("--jobs", type=int, default=None)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", parents=[common], help="Monte Carlo tail-bound check")
    v.add_argument("--claim", default=None,
                   help="b2|m1|m2|hessian|xstar|ex|prod|sum or a full claim id")
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--p", type=int, default=None)
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--deltas", default=None, help="comma list or start:stop:count")
    v.add_argument("--sigma", type=float, default=None)
    v.add_argument("--r", type=float, default=None)
    v.add_argument("--dependent", action="store_const", const=True, default=None)
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("f1", parents=[common], help="tabular perturb-and-recover report")
    f.add_argument("--data", default=None)
    f.add_argument("--target", default=None)
    f.add_argument("--mode", default=None,
                   help="gaussian-var | real-scaled-mixture | real-scaled-correlated | none")
    f.add_argument("--noise-frac", dest="noise_frac", type=float, default=None)
    f.add_argument("--r", type=float, default=None)
    f.add_argument("--mix-weight", dest="mix_weight", type=float, default=None)
    f.add_argument("--lambda-scale", dest="lambda_scale", type=float, default=None)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_f1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AdlassoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
