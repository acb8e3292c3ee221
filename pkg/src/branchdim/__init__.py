"""Dimension computations for countable branched interval systems.

Builds branched systems (continued-fraction, affine, and mixed examples),
computes certified entropy/expansion/dimension brackets for Bernoulli
pushforwards, maximizes dimension over finite-symbol weight vectors, and
searches for periodic-orbit certificates of a dimension gap at 1.
"""

from .brackets import ValueBracket, certified_sum
from .errors import (
    BudgetError,
    ConfigError,
    DivergenceError,
    InconclusiveError,
    IndeterminateError,
    NonContractionError,
    PartitionError,
)
from .gapcert import (
    FactorizationReport,
    GapCertificate,
    PeriodicOrbit,
    bernoulli_factorization_test,
    certificate_search,
    gauss_cylinder_measure,
    periodic_point,
)
from .loader import load_system, system_from_config
from .measures import (
    DecayReport,
    ProbVector,
    decay_check,
    default_depth,
    dimension_bracket,
    entropy,
    entropy_shift_derivative,
    lyapunov_bracket,
    mass_transfer,
    midpoint_lyapunov,
    transfer_improves,
    truncate_renormalize,
)
from .optimize import (
    MaximizerResult,
    SweepReport,
    grid_oracle,
    maximize_dimension,
    moran_root,
    sweep_L,
)
from .systems import (
    CATALOG,
    Branch,
    BranchedSystem,
    Interval,
    build_catalog,
    cylinder_interval,
    k_t,
    s0_estimate,
    sup_deriv,
    tau,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "BranchedSystem",
    "BudgetError",
    "CATALOG",
    "ConfigError",
    "DecayReport",
    "DivergenceError",
    "FactorizationReport",
    "GapCertificate",
    "InconclusiveError",
    "IndeterminateError",
    "Interval",
    "MaximizerResult",
    "NonContractionError",
    "PartitionError",
    "PeriodicOrbit",
    "ProbVector",
    "SweepReport",
    "ValueBracket",
    "bernoulli_factorization_test",
    "build_catalog",
    "certificate_search",
    "certified_sum",
    "cylinder_interval",
    "decay_check",
    "default_depth",
    "dimension_bracket",
    "entropy",
    "entropy_shift_derivative",
    "gauss_cylinder_measure",
    "grid_oracle",
    "k_t",
    "load_system",
    "lyapunov_bracket",
    "mass_transfer",
    "maximize_dimension",
    "midpoint_lyapunov",
    "moran_root",
    "periodic_point",
    "s0_estimate",
    "sup_deriv",
    "sweep_L",
    "system_from_config",
    "tau",
    "transfer_improves",
    "truncate_renormalize",
    "validate",
    "__version__",
]
