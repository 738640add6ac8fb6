"""sphint: limiting spherical integrals, extreme-eigenvalue rate functions,
and finite-N Monte-Carlo verification harnesses."""

from .errors import (
    AssumptionError,
    ConvergenceError,
    DomainError,
    NumericalError,
    ShapeError,
    SphintError,
)
from .measures import (
    DiscreteAtoms,
    MarchenkoPastur,
    Semicircle,
    SpectralMeasure,
    SupportEdges,
    TabulatedDensity,
    dilate,
    discretize,
    log_potential,
    measure_from_json,
    measure_from_spec,
    measure_to_json,
    quantiles,
    reflect,
    stieltjes,
    stieltjes_inverse,
    support_edges,
)
from .spherical import (
    DiscreteModel,
    JBreakdown,
    OutlierSpec,
    Regime,
    ThetaSpec,
    conditional_oracle_2d,
    interlacing_roots,
    j_multi,
    j_one,
    simplex_oracle_1d,
    transport_identity_check,
    v_star,
)
from .ldp import (
    VarianceProfile,
    annealed_lambda_profile,
    annealed_lambda_wishart,
    assumption_neg_check,
    bbp_outlier,
    legendre_check_wigner,
    outlier_interval_cost,
    perturbed_wigner_argmin,
    perturbed_wigner_rate,
    perturbed_wigner_rate_vector,
    perturbed_wishart_rate,
    profile_discretize,
    theta_for_outlier,
    wigner_rate,
    wishart_rate,
)
from .randmat import (
    BACKEND,
    FrameSample,
    MCConfig,
    MCEstimate,
    dump_matrix,
    load_matrix,
    mc_dirichlet_spherical,
    mc_spherical,
    perturbed_wigner_spectrum,
    perturbed_wishart_spectrum,
    sample_dirichlet_weights,
    sample_frame,
    sample_jacobi_gram,
    sample_matrix,
)

__version__ = "0.1.0"
