"""Occupancy probabilities for random subsets and balls in bins."""

from .asymptotics import (
    CParameter,
    DomainError,
    G,
    T_inverse,
    T_inverse_asymptotic,
    ValidityReport,
    c_bins,
    c_subset,
    perturbation_c,
    sqrtN_regime,
    threshold_K,
    validity,
)
from .combinatorics import (
    LogReal,
    TruncatedPoly,
    UnimodalCheckResult,
    binomial_exact,
    check_log_concave,
    falling_factorial_approx,
    log_binomial,
    poly_pow_coeff,
    restricted_composition_weight,
    truncated_binomial_poly,
)
from .exact import (
    BinsModelParams,
    BonferroniBounds,
    BudgetExceeded,
    InvalidParams,
    ProbEstimate,
    SubsetModelParams,
    beta_l_bins,
    beta_m_subset,
    bins_prob_exact,
    g_sequence,
    inclusion_exclusion_prob,
    q_sequence,
    subset_prob_exact,
)
from .montecarlo import McResult, TrialConfig, simulate_bins, simulate_subset

__version__ = "0.1.0"
