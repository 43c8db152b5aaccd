"""Synthetic instance generation and tabular ingestion.

The generative model: clean rows x* ~ N(0, Sigma), y* = x*'w*, then the
observed data are x = x* + e_x and y = y* + e_y.  The ``gaussian`` mode
draws e_x ~ N(0, sigma_e) with no per-row renormalization; the mixture and
correlated modes rescale every perturbation row to l2 norm exactly
``budget_r``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDirection,
    EmptyDataset,
    InvalidDims,
    MissingTarget,
    ParseError,
)
from .linalg import cholesky_sqrt
from .rng import RngStream
from .types import CorruptionSpec, PopulationSpec, ProblemInstance

W_MIN_MAGNITUDE = 0.1

# substream tags used by generate_instance; fixed so instances are replayable
_TAG_XSTAR = 1
_TAG_EY = 2
_TAG_EX = 3


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs for one synthetic experiment cell."""

    p: int
    k: int
    n: int
    sigma1: float = 0.0      # response-noise std
    sigma2: float = 0.0      # isotropic perturbation std (gaussian mode)
    mode: str = "gaussian"
    budget_r: float = 0.0
    mix_weight: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.k <= self.p):
            raise InvalidDims(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if self.n < 1:
            raise InvalidDims("need n >= 1")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise InvalidDims("noise scales must be nonnegative")

    def corruption(self) -> CorruptionSpec:
        if self.mode == "none":
            return CorruptionSpec(mode="none", sigma_ey=self.sigma1)
        if self.mode == "gaussian":
            return CorruptionSpec.gaussian(self.p, self.sigma2, sigma_ey=self.sigma1)
        sigma_e = None
        if self.budget_r > 0:
            # normalized modes: ||e_x||_2 = r exactly, so E[e e'] = (r^2/p) I
            sigma_e = (self.budget_r ** 2 / self.p) * np.eye(self.p)
        return CorruptionSpec(mode=self.mode, budget_r=self.budget_r,
                              sigma_e=sigma_e, sigma_ey=self.sigma1,
                              mix_weight=self.mix_weight)


def sample_ground_truth(p: int, k: int, rng: RngStream) -> PopulationSpec:
    """Random support and coefficients; Sigma defaults to the identity.

    Support is a uniformly random size-k subset; each supported coefficient
    gets a fair random sign and a magnitude uniform on [0.1, 1].
    """
    if k < 1 or k > p:
        raise InvalidDims(f"need 1 <= k <= p, got k={k}, p={p}")
    support = rng.subset(p, k)
    signs = rng.signs(k)
    mags = W_MIN_MAGNITUDE + (1.0 - W_MIN_MAGNITUDE) * rng.uniform(k)
    w = np.zeros(p)
    w[support] = signs * mags
    return PopulationSpec(p=p, k=k, support=tuple(int(i) for i in support),
                          w_star=w, sigma_cov=np.eye(p), sigma_proxy=1.0)


def _unit_budget_row(v: np.ndarray, r: float) -> np.ndarray:
    norm = float(np.sqrt(v @ v))
    if norm == 0.0:
        raise DegenerateDirection("perturbation direction has zero norm")
    return (r / norm) * v


def perturb_mixture(x_star_row: np.ndarray, r: float, mix_weight: float,
                    rng: RngStream) -> np.ndarray:
    """Budget-r row from the Bernoulli/Gaussian mixture attack."""
    p = len(x_star_row)
    if r < 0:
        raise InvalidDims("budget r must be nonnegative")
    if r == 0.0:
        return np.zeros(p)
    if rng.uniform() < mix_weight:
        v = rng.signs(p)
    else:
        v = rng.normal(p)
        if not np.any(v):
            v = rng.normal(p)  # probability-zero event: one resample
    return _unit_budget_row(v, r)


def perturb_correlated(x_star_row: np.ndarray, r: float, mix_weight: float,
                       rng: RngStream) -> np.ndarray:
    """Budget-r row that copies +-x* on the correlated branch."""
    p = len(x_star_row)
    if r < 0:
        raise InvalidDims("budget r must be nonnegative")
    if r == 0.0:
        return np.zeros(p)
    if rng.uniform() < mix_weight:
        v = rng.signs(1)[0] * np.asarray(x_star_row, dtype=float)
        if np.any(v):
            return _unit_budget_row(v, r)
        # zero clean row: fall through to the Gaussian branch
    v = rng.normal(p)
    if not np.any(v):
        v = rng.normal(p)
    return _unit_budget_row(v, r)


def perturb_real_scaled(x_star_row: np.ndarray, r: float, mix_weight: float,
                        feature_std: np.ndarray, variant: str,
                        rng: RngStream) -> np.ndarray:
    """Budget-r row scaled by per-feature standard deviations.

    ``variant`` is ``"mixture"`` (Bernoulli entries +-std_i, Gaussian branch
    N(0, diag(std^2))) or ``"correlated"`` (+-x* on the correlated branch).
    """
    p = len(x_star_row)
    feature_std = np.asarray(feature_std, dtype=float)
    if np.any(feature_std < 0):
        raise InvalidDims("feature_std must be nonnegative")
    if feature_std.shape != (p,):
        raise InvalidDims("feature_std length must match the row")
    if r == 0.0:
        return np.zeros(p)
    if variant == "correlated":
        return perturb_correlated(x_star_row, r, mix_weight, rng)
    if variant != "mixture":
        raise InvalidDims(f"unknown real-scaled variant {variant!r}")
    if rng.uniform() < mix_weight:
        v = rng.signs(p) * feature_std
    else:
        v = rng.normal(p) * feature_std
    if not np.any(v):
        v = rng.normal(p) * feature_std
        if not np.any(v):
            raise DegenerateDirection("all-zero feature_std gives no direction")
    return _unit_budget_row(v, r)


def _is_identity(M: np.ndarray) -> bool:
    p = M.shape[0]
    return M.shape == (p, p) and np.array_equal(M, np.eye(p))


def _perturbation_matrix(X_star: np.ndarray, corruption: CorruptionSpec,
                         rng: RngStream, feature_std=None) -> np.ndarray:
    n, p = X_star.shape
    mode = corruption.mode
    if mode == "none":
        return np.zeros((n, p))
    if mode == "gaussian":
        sigma_e = corruption.sigma_e_for(p)
        diag = sigma_e.diagonal()
        Z = rng.normal_matrix(n, p)
        if np.array_equal(sigma_e, np.diag(diag)):
            return Z * np.sqrt(diag)
        return Z @ cholesky_sqrt(sigma_e).T
    r, w = corruption.budget_r, corruption.mix_weight
    E = np.empty((n, p))
    if mode == "mixture":
        for i in range(n):
            E[i] = perturb_mixture(X_star[i], r, w, rng)
    elif mode == "correlated":
        for i in range(n):
            E[i] = perturb_correlated(X_star[i], r, w, rng)
    else:
        variant = "mixture" if mode == "real_scaled_mixture" else "correlated"
        if feature_std is None:
            sigma_e = corruption.sigma_e_for(p)
            feature_std = np.sqrt(sigma_e.diagonal())
        for i in range(n):
            E[i] = perturb_real_scaled(X_star[i], r, w, feature_std, variant, rng)
    return E


def generate_instance(truth: PopulationSpec, corruption: CorruptionSpec, n: int,
                      rng: RngStream, retain_clean: bool = True,
                      feature_std=None) -> ProblemInstance:
    """Draw one instance of the corrupted linear model.

    With ``retain_clean=False`` the clean design and perturbation matrix are
    folded into X and dropped, halving peak memory for large sweeps.
    """
    if n < 1:
        raise InvalidDims("need n >= 1")
    p = truth.p
    rs_x = rng.child(_TAG_XSTAR)
    rs_ey = rng.child(_TAG_EY)
    rs_ex = rng.child(_TAG_EX)

    Z = rs_x.normal_matrix(n, p)
    X_star = Z if _is_identity(truth.sigma_cov) else Z @ cholesky_sqrt(truth.sigma_cov).T
    y = X_star @ truth.w_star
    if corruption.sigma_ey > 0:
        y = y + corruption.sigma_ey * rs_ey.normal(n)

    E = _perturbation_matrix(X_star, corruption, rs_ex, feature_std=feature_std)
    if retain_clean:
        X = X_star + E
        return ProblemInstance(X=X, y=y, corruption=corruption, seed=rng.master_seed,
                               X_star=X_star, E_x=E, truth=truth)
    X_star += E
    return ProblemInstance(X=X_star, y=y, corruption=corruption,
                           seed=rng.master_seed, truth=truth)


@dataclass(frozen=True)
class TabularDataset:
    """Numeric design matrix with target column split off."""

    X_raw: np.ndarray
    y_raw: np.ndarray
    column_names: tuple
    feature_std: np.ndarray

    @property
    def n(self) -> int:
        return self.X_raw.shape[0]

    @property
    def p(self) -> int:
        return self.X_raw.shape[1]


def load_tabular(path, target_column) -> TabularDataset:
    """Read a headed CSV and split off the target column.

    ``target_column`` is a header name or a 0-based column index.  Any
    non-numeric cell aborts the load with its row and column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path} is empty")
        header = [h.strip() for h in header]
        if isinstance(target_column, str):
            if target_column not in header:
                raise MissingTarget(f"no column named {target_column!r}")
            target_idx = header.index(target_column)
        else:
            target_idx = int(target_column)
            if not (0 <= target_idx < len(header)):
                raise MissingTarget(f"target index {target_idx} out of range "
                                    f"for {len(header)} columns")
        rows = []
        for r, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != len(header):
                raise ParseError(r, 0, f"expected {len(header)} cells, got {len(row)}")
            vals = np.empty(len(row))
            for c, cell in enumerate(row):
                try:
                    vals[c] = float(cell)
                except ValueError:
                    raise ParseError(r, c, f"non-numeric cell {cell!r}")
            rows.append(vals)
    if not rows:
        raise EmptyDataset(f"{path} holds a header but no data rows")
    data = np.vstack(rows)
    y = data[:, target_idx].copy()
    X = np.delete(data, target_idx, axis=1)
    names = tuple(h for i, h in enumerate(header) if i != target_idx)
    std = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    return TabularDataset(X_raw=X, y_raw=y, column_names=names, feature_std=std)
