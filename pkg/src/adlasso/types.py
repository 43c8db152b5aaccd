"""Shared domain types: population model, adversary description, realized data.

All types are immutable after construction (arrays are stored read-only) and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidDims, NonPsdCovariance, NotSymmetric
from .linalg import asymmetry, cholesky_sqrt

CORRUPTION_MODES = (
    "none",
    "gaussian",
    "mixture",
    "correlated",
    "real_scaled_mixture",
    "real_scaled_correlated",
)

COV_SYM_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    # adopts the array without copying when possible; the stored buffer is
    # marked read-only, so callers must hand over ownership
    arr = np.asarray(a, dtype=dtype)
    try:
        arr.setflags(write=False)
    except ValueError:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


def _check_psd(M, name: str):
    gap = asymmetry(M)
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    if gap > COV_SYM_TOL * scale:
        raise NotSymmetric(f"{name} asymmetry {gap:.3e} exceeds {COV_SYM_TOL:.0e}")
    try:
        cholesky_sqrt(M)
    except NotSymmetric:
        raise
    except Exception as exc:
        raise NonPsdCovariance(f"{name} is not positive semidefinite: {exc}") from exc


@dataclass(frozen=True)
class PopulationSpec:
    """Ground-truth population: dimensions, support, coefficients, covariance.

    ``sigma_proxy`` is the sub-Gaussian variance-proxy scale of the
    standardized clean features (1 for Gaussian generators, with all scale
    carried by ``sigma_cov``).
    """

    p: int
    k: int
    support: tuple
    w_star: np.ndarray
    sigma_cov: np.ndarray
    sigma_proxy: float = 1.0

    def __post_init__(self):
        if not (1 <= self.k <= self.p):
            raise InvalidDims(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        support = tuple(int(i) for i in self.support)
        if len(support) != self.k or len(set(support)) != self.k:
            raise InvalidDims(f"support must hold {self.k} distinct indices")
        if any(i < 0 or i >= self.p for i in support):
            raise InvalidDims("support index out of range")
        w = _frozen(self.w_star)
        if w.shape != (self.p,):
            raise InvalidDims(f"w_star must have length p={self.p}")
        on = np.zeros(self.p, dtype=bool)
        on[list(support)] = True
        if np.any(w[~on] != 0.0) or np.any(w[on] == 0.0):
            raise InvalidDims("w_star must be nonzero exactly on the support")
        cov = _frozen(self.sigma_cov)
        if cov.shape != (self.p, self.p):
            raise InvalidDims("sigma_cov must be p x p")
        _check_psd(cov, "sigma_cov")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "w_star", w)
        object.__setattr__(self, "sigma_cov", cov)

    @property
    def non_support(self) -> tuple:
        on = set(self.support)
        return tuple(i for i in range(self.p) if i not in on)

    @property
    def w_support(self) -> np.ndarray:
        return self.w_star[list(self.support)]


@dataclass(frozen=True)
class CorruptionSpec:
    """Adversary and noise description.

    ``budget_r`` is the per-sample l2 budget for the normalized modes and
    the variance-proxy scale otherwise; ``sigma_e`` is the perturbation
    covariance; ``sigma_ey`` the response-noise proxy; ``mix_weight`` the
    probability of the Bernoulli branch in the mixture modes.
    """

    mode: str
    budget_r: float = 0.0
    sigma_e: Optional[np.ndarray] = None
    sigma_ey: float = 0.0
    mix_weight: float = 0.5

    def __post_init__(self):
        if self.mode not in CORRUPTION_MODES:
            raise InvalidDims(f"unknown corruption mode {self.mode!r}")
        if self.budget_r < 0:
            raise InvalidDims("budget_r must be nonnegative")
        if self.sigma_ey < 0:
            raise InvalidDims("sigma_ey must be nonnegative")
        if not (0.0 <= self.mix_weight <= 1.0):
            raise InvalidDims("mix_weight must lie in [0, 1]")
        if self.sigma_e is not None:
            se = _frozen(self.sigma_e)
            _check_psd(se, "sigma_e")
            object.__setattr__(self, "sigma_e", se)
        if self.mode == "none":
            if self.budget_r != 0.0:
                raise InvalidDims("mode 'none' requires budget_r = 0")
            if self.sigma_e is not None and np.any(self.sigma_e != 0.0):
                raise InvalidDims("mode 'none' requires sigma_e = 0")

    def sigma_e_for(self, p: int) -> np.ndarray:
        """Perturbation covariance as a concrete p x p matrix."""
        if self.sigma_e is None:
            return np.zeros((p, p))
        if self.sigma_e.shape != (p, p):
            raise InvalidDims(f"sigma_e shape {self.sigma_e.shape} does not match p={p}")
        return np.asarray(self.sigma_e)

    @classmethod
    def none(cls) -> "CorruptionSpec":
        return cls(mode="none", sigma_ey=0.0)

    @classmethod
    def gaussian(cls, p: int, sigma2: float, sigma_ey: float = 0.0) -> "CorruptionSpec":
        """Isotropic Gaussian attack e_x ~ N(0, sigma2^2 I); proxy scale r = 1."""
        return cls(mode="gaussian", budget_r=1.0 if sigma2 > 0 else 0.0,
                   sigma_e=sigma2 ** 2 * np.eye(p), sigma_ey=sigma_ey)


@dataclass(frozen=True)
class ProblemInstance:
    """One realized dataset, with clean components retained when available."""

    X: np.ndarray
    y: np.ndarray
    corruption: CorruptionSpec
    seed: int
    X_star: Optional[np.ndarray] = None
    E_x: Optional[np.ndarray] = None
    truth: Optional[PopulationSpec] = None

    def __post_init__(self):
        X = _frozen(self.X)
        y = _frozen(self.y)
        if X.ndim != 2:
            raise InvalidDims("X must be 2-d")
        n, p = X.shape
        if n < 1:
            raise InvalidDims("need n >= 1")
        if y.shape != (n,):
            raise InvalidDims("y length must match the number of rows of X")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        for name in ("X_star", "E_x"):
            v = getattr(self, name)
            if v is not None:
                v = _frozen(v)
                if v.shape != (n, p):
                    raise InvalidDims(f"{name} must have shape {X.shape}")
                object.__setattr__(self, name, v)
        if self.truth is not None and self.truth.p != p:
            raise InvalidDims("truth dimension does not match X")
        if self.X_star is not None and self.E_x is not None:
            gap = float(np.abs(self.X - self.X_star - self.E_x).max())
            if gap > 1e-12 * max(1.0, float(np.abs(self.X).max())):
                raise InvalidDims(f"X != X_star + E_x (max gap {gap:.3e})")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def e_y(self) -> np.ndarray:
        """Response noise y - X* w*; needs truth and the clean design."""
        from .errors import MissingCleanData, MissingTruth

        if self.truth is None:
            raise MissingTruth("e_y needs ground truth")
        if self.X_star is None:
            raise MissingCleanData("e_y needs the retained clean design")
        return self.y - self.X_star @ self.truth.w_star
