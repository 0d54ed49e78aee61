"""alphaleak: order-alpha information measures and their leakage forms.

Computes the five order-alpha mutual-information variants on finite
(prior, channel) pairs, the generalized-vulnerability machinery that
represents each of them as a multiplicative leakage, and the numerical
harness that verifies the identities against brute-force oracles.
All quantities are in nats.
"""

from ._kernels import backend
from .errors import (
    AlphaleakError,
    ConvergenceFailure,
    DegenerateVulnerability,
    DimensionMismatch,
    DomainError,
    InvalidOrder,
    NegativeWeight,
    NotNormalized,
    NumericalInconsistency,
    OracleTooLarge,
    ParseError,
    UnsupportedVariant,
    ValidationError,
    ZeroTotal,
)
from .leakage import (
    GainFunction,
    LeakageSpec,
    VulnerabilityResult,
    alpha_mi_via_leakage,
    arrow_pratt,
    cond_vulnerability,
    g_leakage,
    gain_eval,
    leakage_spec_for,
    posterior_vulnerability_hat,
    power_loss,
    power_score_gain,
    prior_vulnerability,
    soft01_gain,
    transformed_gain,
)
from .optimize import (
    AugustinResult,
    EgResult,
    LpResult,
    OptimizerConfig,
    augustin_fixed_point,
    eg_optimize,
    lp_alternating,
    simplex_grid,
)
from .qcalc import (
    Aggregator,
    GibbsOptimum,
    HolderReport,
    affine_transform,
    gibbs_optimum,
    kn_mean,
    linear_aggregator,
    log_aggregator,
    q_exp,
    q_log,
    q_log_aggregator,
    reverse_holder_check,
)
from .renyi import (
    Method,
    MiVariant,
    ShannonMeasures,
    alpha_mi,
    cond_renyi_entropy,
    renyi_divergence,
    renyi_entropy,
    shannon_measures,
)
from .simplex import (
    Channel,
    DecisionRule,
    JointDist,
    Pmf,
    compose_joint,
    constant_rule,
    joint_from_matrix,
    make_channel,
    make_pmf,
    p_norm,
    tilt,
    uniform_pmf,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
