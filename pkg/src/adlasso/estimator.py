"""scikit-learn compatible front end for the coordinate-descent solver.

Only the estimator interface comes from scikit-learn; the optimization is
this package's own.  The class composes with pipelines, grid search and
``clone`` through the standard ``get_params``/``set_params`` contract.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .lasso import SolverOptions, solve_lasso_xy
from .validation import as_float_matrix, check_design


class AdversarialLasso(BaseEstimator, RegressorMixin):
    """LASSO tuned for support recovery from corrupted designs.

    Parameters
    ----------
    lam : float
        l1 penalty weight in (1/2n)||y - Xw||^2 + lam*||w||_1.
    tol : float
        Max-norm KKT residual required at convergence.
    max_iter : int
        Cap on full coordinate sweeps.
    support_tol : float
        Absolute threshold on |w_i| for membership in ``support_``.

    Attributes
    ----------
    coef_ : ndarray of shape (p,)
        Estimated regression vector.
    dual_ : ndarray of shape (p,) or None
        Subgradient certificate (None when lam = 0).
    support_ : ndarray of int
        Indices with |coef_| above ``support_tol``.
    kkt_residual_ : float
    n_iter_ : int
    """

    def __init__(self, lam: float = 0.1, tol: float = 1e-7,
                 max_iter: int = 100_000, support_tol: float = 1e-6):
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter
        self.support_tol = support_tol

    def fit(self, X, y):
        X, y = check_design(X, y)
        opts = SolverOptions(tol=self.tol, max_iter=self.max_iter,
                             support_tol=self.support_tol)
        sol = solve_lasso_xy(X, y, self.lam, opts)
        self.coef_ = sol.w_hat
        self.dual_ = sol.z_hat
        self.support_ = np.array(sol.support_hat, dtype=int)
        self.kkt_residual_ = sol.kkt_residual
        self.n_iter_ = sol.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise AttributeError("this AdversarialLasso instance is not fitted yet")
        return as_float_matrix(X) @ self.coef_
