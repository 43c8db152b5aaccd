"""Batch experiment drivers: phase-transition sweeps and the
perturb-and-recover pipeline for tabular data.

Trials are deterministic functions of (master_seed, cell indices, trial
index), so results are identical for any worker count; floating-point
reductions run over fixed-size chunks in a fixed order for byte-stable
output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .datagen import SyntheticConfig, TabularDataset, generate_instance, sample_ground_truth
from .errors import AdlassoError, InvalidDims
from .lasso import SolverOptions, solve_lasso, solve_lasso_xy
from .rng import RngStream
from .theory import compute_bundle, lambda_scaled

_CHUNK = 25  # trials per reduction chunk; fixed so --jobs never changes bytes

_blas_limiter = None


def _worker_init():
    global _blas_limiter
    try:
        from threadpoolctl import threadpool_limits

        _blas_limiter = threadpool_limits(1)
    except Exception:
        _blas_limiter = None


def f1_score(true_support, perturbed_support, conventional: bool = False):
    """(recall, precision, f1) for a recovered support.

    Default denominators follow the experimental protocol exactly: recall
    divides by the *perturbed* support size and precision by the *true*
    one.  ``conventional=True`` swaps to the textbook definition.  Two
    empty sets score 1.0 by convention; a single empty set scores 0.
    """
    T = frozenset(int(i) for i in true_support)
    P = frozenset(int(i) for i in perturbed_support)
    if not T and not P:
        return 1.0, 1.0, 1.0
    hits = len(T & P)
    if conventional:
        recall = hits / len(T) if T else 0.0
        precision = hits / len(P) if P else 0.0
    else:
        recall = hits / len(P) if P else 0.0
        precision = hits / len(T) if T else 0.0
    f1 = 0.0 if recall + precision == 0 else 2.0 * recall * precision / (recall + precision)
    return recall, precision, f1


@dataclass(frozen=True)
class SweepConfig:
    """One phase-transition experiment grid."""

    p_list: tuple
    k: int
    ratio_grid: tuple          # n / log(p) values
    trials: int
    mode: str = "gaussian"
    sigma1: float = 0.05
    sigma2: float = 0.1
    budget_r: float = 0.0
    mix_weight: float = 0.5
    lambda_policy: str = "twice_lower_bound"   # twice_lower_bound | fixed | scaled
    lambda_value: float = 2.0                  # fixed value, or the scale c
    master_seed: int = 0
    support_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(int(p) for p in self.p_list))
        object.__setattr__(self, "ratio_grid", tuple(float(r) for r in self.ratio_grid))
        if self.trials < 1:
            raise InvalidDims("need trials >= 1")
        if any(b >= a for a, b in zip(self.ratio_grid[1:], self.ratio_grid)):
            raise InvalidDims("ratio_grid must be strictly increasing")
        if self.lambda_policy not in ("twice_lower_bound", "fixed", "scaled"):
            raise InvalidDims(f"unknown lambda policy {self.lambda_policy!r}")


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    error_tags: dict = field(default_factory=dict)   # (p, ratio) -> [tag, ...]

    def row_for(self, p: int, ratio: float) -> dict:
        for row in self.rows:
            if row["p"] == p and row["ratio"] == ratio:
                return row
        raise KeyError((p, ratio))

    def probs_for(self, p: int) -> list:
        return [r["prob"] for r in sorted(self.rows, key=lambda r: r["ratio"])
                if r["p"] == p]


def _cell_n(p: int, ratio: float) -> int:
    return max(1, int(round(ratio * math.log(p))))


def _trial_lambda(cfg: SweepConfig, truth, corruption, n: int) -> float:
    if cfg.lambda_policy == "fixed":
        return cfg.lambda_value
    if cfg.lambda_policy == "scaled":
        return lambda_scaled(truth.p, n, cfg.lambda_value)
    bundle = compute_bundle(truth, corruption, None, n)
    if not math.isfinite(bundle.lambda_lb):
        raise AdlassoError("lambda lower bound is infinite (incoherence violated)")
    return 2.0 * bundle.lambda_lb


def _sweep_chunk(args):
    cfg, p_idx, ratio_idx, lo, hi = args
    p = cfg.p_list[p_idx]
    ratio = cfg.ratio_grid[ratio_idx]
    n = _cell_n(p, ratio)
    syn = SyntheticConfig(p=p, k=cfg.k, n=n, sigma1=cfg.sigma1, sigma2=cfg.sigma2,
                          mode=cfg.mode, budget_r=cfg.budget_r,
                          mix_weight=cfg.mix_weight, seed=cfg.master_seed)
    corruption = syn.corruption()
    opts = SolverOptions(support_tol=cfg.support_tol)
    base = RngStream(cfg.master_seed)
    successes = 0
    f1_sum = 0.0
    tags = []
    for trial in range(lo, hi):
        rng = base.child_from(p_idx + 1, ratio_idx + 1, trial + 1)
        try:
            truth = sample_ground_truth(p, cfg.k, rng.child(0))
            inst = generate_instance(truth, corruption, n, rng.child(1),
                                     retain_clean=False)
            lam = _trial_lambda(cfg, truth, corruption, n)
            sol = solve_lasso(inst, lam, opts)
        except AdlassoError as exc:
            tags.append(f"trial {trial}: {type(exc).__name__}: {exc}")
            continue
        if sol.support_hat == truth.support:
            successes += 1
        _, _, f1 = f1_score(truth.support, sol.support_hat)
        f1_sum += f1
    return p_idx, ratio_idx, lo, successes, f1_sum, tags


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Run every (p, ratio) cell; success means exact support equality.

    Per-trial solver errors count as failures and are recorded under the
    cell's error tags; the sweep never aborts on them.
    """
    tasks = []
    for p_idx in range(len(cfg.p_list)):
        for ratio_idx in range(len(cfg.ratio_grid)):
            for lo in range(0, cfg.trials, _CHUNK):
                hi = min(lo + _CHUNK, cfg.trials)
                tasks.append((cfg, p_idx, ratio_idx, lo, hi))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init) as pool:
            outcomes = list(pool.map(_sweep_chunk, tasks, chunksize=1))
    else:
        outcomes = [_sweep_chunk(t) for t in tasks]

    acc = {}
    tags = {}
    for p_idx, ratio_idx, lo, successes, f1_sum, chunk_tags in sorted(
            outcomes, key=lambda o: (o[0], o[1], o[2])):
        cell = (p_idx, ratio_idx)
        s, f = acc.get(cell, (0, 0.0))
        acc[cell] = (s + successes, f + f1_sum)
        if chunk_tags:
            tags.setdefault(cell, []).extend(chunk_tags)
    result = SweepResult()
    for (p_idx, ratio_idx), (successes, f1_sum) in sorted(acc.items()):
        p = cfg.p_list[p_idx]
        ratio = cfg.ratio_grid[ratio_idx]
        result.rows.append({
            "p": p, "k": cfg.k, "n": _cell_n(p, ratio), "ratio": ratio,
            "trials": cfg.trials, "successes": successes,
            "prob": successes / cfg.trials, "mean_f1": f1_sum / cfg.trials,
        })
        if (p_idx, ratio_idx) in tags:
            result.error_tags[(p, ratio)] = tags[(p_idx, ratio_idx)]
    result.rows.sort(key=lambda r: (r["p"], r["ratio"]))
    return result


def smoothed_max_decrease(probs, window: int = 3) -> float:
    """Largest adjacent decrease after a centered moving average."""
    x = np.asarray(probs, dtype=float)
    if x.size < 2:
        return 0.0
    half = window // 2
    sm = np.array([x[max(0, i - half):i + half + 1].mean() for i in range(x.size)])
    return float(np.maximum(sm[:-1] - sm[1:], 0.0).max())


def crossing_ratio(ratios, probs, level: float) -> Optional[float]:
    """First grid crossing of ``level``, linearly interpolated in log-ratio."""
    for i, prob in enumerate(probs):
        if prob >= level:
            if i == 0:
                return float(ratios[0])
            r0, r1 = ratios[i - 1], ratios[i]
            p0, p1 = probs[i - 1], probs[i]
            if p1 == p0:
                return float(r1)
            t = (level - p0) / (p1 - p0)
            return float(math.exp(math.log(r0) + t * (math.log(r1) - math.log(r0))))
    return None


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    scale: np.ndarray
    y_mean: float

    def apply(self, X, y):
        return (X - self.mean) / self.scale, y - self.y_mean


def standardize(data_X: np.ndarray, data_y: np.ndarray) -> Standardization:
    """Column standardization fit on the original data; zero-variance
    columns keep scale 1 so they stay finite (and stay out of the support)."""
    mean = data_X.mean(axis=0)
    scale = data_X.std(axis=0, ddof=1) if data_X.shape[0] > 1 else np.ones(data_X.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    return Standardization(mean=mean, scale=scale, y_mean=float(data_y.mean()))


def _tabular_perturbation(data: TabularDataset, mode: str, rng: RngStream,
                          noise_frac: float, budget_r: float, mix_weight: float):
    from .datagen import perturb_real_scaled

    n, p = data.X_raw.shape
    std = np.asarray(data.feature_std, dtype=float)
    if mode == "gaussian_var":
        # white noise with variance proportional to each feature's variance
        return rng.normal_matrix(n, p) * (math.sqrt(noise_frac) * std)
    if mode in ("real_scaled_mixture", "real_scaled_correlated"):
        variant = "mixture" if mode == "real_scaled_mixture" else "correlated"
        E = np.empty((n, p))
        for i in range(n):
            E[i] = perturb_real_scaled(data.X_raw[i], budget_r, mix_weight,
                                       std, variant, rng)
        return E
    if mode == "none":
        return np.zeros((n, p))
    raise InvalidDims(f"unknown tabular perturbation mode {mode!r}")


def run_real_pipeline(data: TabularDataset, mode: str, rng: RngStream,
                      noise_frac: float = 0.1, budget_r: float = 0.0,
                      mix_weight: float = 0.5, lambda_scale: float = 2.0,
                      lambda_fixed: Optional[float] = None,
                      opts: SolverOptions = SolverOptions()) -> dict:
    """Perturb-and-recover pipeline on a tabular dataset.

    The "true" support comes from solving on the standardized original
    data; the perturbed support from re-solving perturbed data pushed
    through the *same* standardization and the same lambda policy.
    """
    n, p = data.X_raw.shape
    transform = standardize(data.X_raw, data.y_raw)
    Xs, ys = transform.apply(data.X_raw, data.y_raw)
    lam = lambda_fixed if lambda_fixed is not None else lambda_scaled(p, n, lambda_scale)
    sol_true = solve_lasso_xy(Xs, ys, lam, opts)

    E = _tabular_perturbation(data, mode, rng, noise_frac, budget_r, mix_weight)
    Xp, yp = transform.apply(data.X_raw + E, data.y_raw)
    sol_pert = solve_lasso_xy(Xp, yp, lam, opts)

    recall, precision, f1 = f1_score(sol_true.support_hat, sol_pert.support_hat)
    return {
        "format": "adlasso-f1-report-v1",
        "n": n, "p": p,
        "lambda": lam,
        "mode": mode,
        "noise_frac": noise_frac,
        "budget_r": budget_r,
        "mix_weight": mix_weight,
        "true_support": sorted(int(i) for i in sol_true.support_hat),
        "perturbed_support": sorted(int(i) for i in sol_pert.support_hat),
        "recall": recall,
        "precision": precision,
        "f1": f1,
    }
