"""File formats: instance dumps, solution/report JSON, result CSVs.

Floats go through ``repr`` (JSON) or ``%.17g`` (CSV), both of which
round-trip float64 exactly, so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import os
from typing import Optional

import numpy as np

from .types import CorruptionSpec, PopulationSpec, ProblemInstance

FLOAT_FMT = "%.17g"


def _write_matrix_csv(path, M):
    np.savetxt(path, np.atleast_2d(M), fmt=FLOAT_FMT, delimiter=",")


def _read_matrix_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def _corruption_to_dict(c: CorruptionSpec) -> dict:
    out = {"mode": c.mode, "budget_r": c.budget_r, "sigma_ey": c.sigma_ey,
           "mix_weight": c.mix_weight}
    if c.sigma_e is None:
        out["sigma_e"] = None
    else:
        diag = c.sigma_e.diagonal()
        if np.array_equal(c.sigma_e, np.diag(diag)):
            out["sigma_e"] = {"diag": [float(v) for v in diag]}
        else:
            out["sigma_e"] = {"full": [[float(v) for v in row] for row in c.sigma_e]}
    return out


def _corruption_from_dict(d: dict) -> CorruptionSpec:
    se = d.get("sigma_e")
    if se is not None:
        se = np.diag(se["diag"]) if "diag" in se else np.array(se["full"])
    return CorruptionSpec(mode=d["mode"], budget_r=d["budget_r"], sigma_e=se,
                          sigma_ey=d["sigma_ey"], mix_weight=d.get("mix_weight", 0.5))


def save_instance(directory, inst: ProblemInstance, extra_config: Optional[dict] = None):
    """Write instance.json + X.csv + y.csv (+ clean payloads when retained)."""
    os.makedirs(directory, exist_ok=True)
    manifest = {
        "format": "adlasso-instance-v1",
        "n": inst.n,
        "p": inst.p,
        "seed": inst.seed,
        "corruption": _corruption_to_dict(inst.corruption),
    }
    if inst.truth is not None:
        t = inst.truth
        manifest["truth"] = {
            "k": t.k,
            "support": list(t.support),
            "w_star": [float(v) for v in t.w_star],
            "sigma_proxy": t.sigma_proxy,
            "sigma_cov": "identity" if np.array_equal(t.sigma_cov, np.eye(t.p))
                         else [[float(v) for v in row] for row in t.sigma_cov],
        }
    if extra_config:
        manifest["config"] = extra_config
    with open(os.path.join(directory, "instance.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_matrix_csv(os.path.join(directory, "X.csv"), inst.X)
    _write_matrix_csv(os.path.join(directory, "y.csv"), inst.y.reshape(-1, 1))
    if inst.X_star is not None:
        _write_matrix_csv(os.path.join(directory, "X_star.csv"), inst.X_star)
    if inst.E_x is not None:
        _write_matrix_csv(os.path.join(directory, "E_x.csv"), inst.E_x)


def load_instance(directory) -> ProblemInstance:
    with open(os.path.join(directory, "instance.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    X = _read_matrix_csv(os.path.join(directory, "X.csv"))
    y = _read_matrix_csv(os.path.join(directory, "y.csv")).reshape(-1)
    truth = None
    if "truth" in manifest:
        t = manifest["truth"]
        p = manifest["p"]
        cov = np.eye(p) if t["sigma_cov"] == "identity" else np.array(t["sigma_cov"])
        truth = PopulationSpec(p=p, k=t["k"], support=tuple(t["support"]),
                               w_star=np.array(t["w_star"]), sigma_cov=cov,
                               sigma_proxy=t.get("sigma_proxy", 1.0))
    kwargs = {}
    for name, fname in (("X_star", "X_star.csv"), ("E_x", "E_x.csv")):
        path = os.path.join(directory, fname)
        if os.path.exists(path):
            kwargs[name] = _read_matrix_csv(path)
    return ProblemInstance(X=X, y=y, corruption=_corruption_from_dict(manifest["corruption"]),
                           seed=manifest["seed"], truth=truth, **kwargs)


def solution_to_dict(sol, cert=None, claim_report=None, bundle=None,
                     resolved_config: Optional[dict] = None) -> dict:
    w = sol.w_hat
    out = {
        "format": "adlasso-solution-v1",
        "lambda": sol.lam,
        "kkt_residual": sol.kkt_residual,
        "iterations": sol.iterations,
        "support_hat": [int(i) for i in sol.support_hat],
        "support_tol": sol.support_tol,
        "w_hat_sparse": [[int(i), float(w[i])] for i in np.flatnonzero(w)],
        "z_hat": None if sol.z_hat is None else [float(v) for v in sol.z_hat],
    }
    if cert is not None:
        out["certificate"] = cert.as_dict()
    if claim_report is not None:
        out["theorem1"] = claim_report.as_dict()
    if bundle is not None:
        out["bundle"] = bundle.as_dict()
    if resolved_config is not None:
        out["config"] = resolved_config
    return out


def dump_json(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def sweep_csv_lines(rows) -> list[str]:
    """Pinned sweep format: one line per cell, sorted by (p, ratio)."""
    lines = ["p,k,n,ratio,trials,successes,prob,mean_f1"]
    for row in sorted(rows, key=lambda r: (r["p"], r["ratio"])):
        lines.append("%d,%d,%d,%s,%d,%d,%s,%s" % (
            row["p"], row["k"], row["n"], repr(float(row["ratio"])),
            row["trials"], row["successes"], repr(float(row["prob"])),
            repr(float(row["mean_f1"]))))
    return lines


def write_sweep_csv(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(sweep_csv_lines(rows)) + "\n")


def write_tail_report_csv(path, reports):
    """Pinned verification format, one line per (claim, delta) pair."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    lines = ["claim_id,delta,empirical_freq,theory_bound,trials,n,p,k"]
    for rep in reports:
        for row in rep.rows():
            lines.append("%s,%s,%s,%s,%d,%d,%d,%d" % (
                row["claim_id"], repr(float(row["delta"])),
                repr(float(row["empirical_freq"])), repr(float(row["theory_bound"])),
                row["trials"], row["n"], row["p"], row["k"]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
