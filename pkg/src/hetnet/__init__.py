"""Success probability and area spectral efficiency of multiuser MIMO
heterogeneous cellular networks, with density optimization and a Monte
Carlo validator."""

__version__ = "0.1.0"

from .coverage import (
    db_to_linear,
    ps_asymptotic,
    ps_asymptotic_tier,
    ps_exact,
    ps_exact_tier,
    q_coefficients,
    reciprocal_series,
)
from .metrics import ase, ase_asymptotic, monotonicity_signs, ps_max
from .model import (
    ConfigError,
    NetworkModel,
    TierConfig,
    association_probabilities,
    coefficient_vectors,
    validate,
)
from .montecarlo import SimConfig, simulate_ps
from .optimize import (
    OptimizationResult,
    feasibility,
    grid_search_oracle,
    optimize_general,
    optimize_usdma,
    solve_lp_box_halfspace,
)
