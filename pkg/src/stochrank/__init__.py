"""Simulation and limit laws of the stochastic ranking (move-to-front) process."""

from .intensity import (
    CommonProfile,
    Constant,
    Homogeneous,
    MixtureSpec,
    PiecewiseConstant,
    PiecewiseLinearCumulative,
    Sinusoidal,
    build_mixture,
    interval_mass,
    sample_jump_times,
)
from .ranking import (
    BLOCKS,
    PROPORTIONAL,
    ParticleSystem,
    boundary_fraction,
    empirical_tail,
    init_system,
    position_at,
    positions,
    snapshot,
    total_jumps_and_inverse,
)
from .limits import LimitEvaluator, invert_t0, invert_yhat, limit_tail, y_a, y_b, y_c
from .burgers import PdeCheckConfig, TailSide, TopSide, characteristic_curve, pde_residual
from .special import upper_incomplete_gamma, zeta
from .timechange import (
    RankingCurve,
    ZipfFamily,
    pareto_tail,
    periodic_shift,
    timechange_observable,
    x_b_curve,
    zipf_mixture,
    zipf_weights_and_Z,
    zipf_Z_asymptotic,
)
from .estimation import FitResult, ObservationSet, fit_b, generate_observations

__version__ = "0.1.0"
