"""Support recovery with LASSO under adversarially corrupted training data."""

from .concentration import (
    ClaimParams,
    TailBoundReport,
    VMatrixEigen,
    symmetrize_embed,
    v_matrix_eigenvalues,
    verify_tail_bound,
)
from .datagen import (
    SyntheticConfig,
    TabularDataset,
    generate_instance,
    load_tabular,
    perturb_correlated,
    perturb_mixture,
    perturb_real_scaled,
    sample_ground_truth,
)
from .estimator import AdversarialLasso
from .harness import (
    SweepConfig,
    SweepResult,
    f1_score,
    run_real_pipeline,
    run_sweep,
)
from .lasso import (
    LassoSolution,
    PdwCertificate,
    SolverOptions,
    pdw_certificate,
    pdw_split,
    projection_matrix,
    soft_threshold,
    solve_lasso,
    solve_lasso_xy,
)
from .linalg import cholesky_sqrt, induced_inf_norm, jacobi_eigh, spectral_norm
from .rng import RngStream
from .theory import (
    TheoryBundle,
    Theorem1Report,
    TrivialGuess,
    check_theorem1,
    compute_bundle,
    corrupted_covariance,
    estimate_cross_covariance,
    lambda_scaled,
    mutual_incoherence,
    trivial_support_guess,
)
from .types import CorruptionSpec, PopulationSpec, ProblemInstance

__version__ = "0.1.0"

__all__ = [
    "AdversarialLasso",
    "ClaimParams",
    "CorruptionSpec",
    "LassoSolution",
    "PdwCertificate",
    "PopulationSpec",
    "ProblemInstance",
    "RngStream",
    "SolverOptions",
    "SweepConfig",
    "SweepResult",
    "SyntheticConfig",
    "TabularDataset",
    "TailBoundReport",
    "TheoryBundle",
    "Theorem1Report",
    "TrivialGuess",
    "VMatrixEigen",
    "check_theorem1",
    "cholesky_sqrt",
    "compute_bundle",
    "corrupted_covariance",
    "estimate_cross_covariance",
    "f1_score",
    "generate_instance",
    "induced_inf_norm",
    "jacobi_eigh",
    "lambda_scaled",
    "load_tabular",
    "mutual_incoherence",
    "pdw_certificate",
    "pdw_split",
    "perturb_correlated",
    "perturb_mixture",
    "perturb_real_scaled",
    "projection_matrix",
    "run_real_pipeline",
    "run_sweep",
    "sample_ground_truth",
    "soft_threshold",
    "solve_lasso",
    "solve_lasso_xy",
    "spectral_norm",
    "symmetrize_embed",
    "trivial_support_guess",
    "v_matrix_eigenvalues",
    "verify_tail_bound",
]
