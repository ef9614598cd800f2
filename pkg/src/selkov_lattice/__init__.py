"""Stochastic reversible Selkov lattice systems with jump noise.

Simulation of the coupled two-species lattice SDE under Wiener plus
compound-Poisson forcing, ensemble propagation in the pullback sense,
and numerical analysis of the induced laws: moments, spatial tails,
dual-Lipschitz / Wasserstein distances, and dissipativity reports.
"""

from .backend import backend_name
from .dissipativity import (
    AbsorptionReport,
    absorbing_report,
    dissipation_margin,
    pullback_forcing_integral,
)
from .distances import (
    DistanceResult,
    bounded_lipschitz_distance,
    dirac_distance,
    wasserstein1,
)
from .forcing import (
    ForcingSpec,
    JumpKernel,
    JumpLaw,
    JumpSizeFactor,
    LevyConfig,
    SiteForcing,
    SiteProfile,
    StateKernel,
    TimeEnvelope,
    validate_growth_bound,
)
from .integrate import (
    EnsembleConfig,
    InitialLaw,
    SchemeVariant,
    TimeGrid,
    TrajectoryRecord,
    em_step,
    integrate_ensemble,
    integrate_path,
    pullback_ensemble,
    record_measure,
)
from .lattice import (
    BlowUpError,
    Boundary,
    LatticeState,
    ModelParams,
    NoiseIntensity,
    TruncationConfig,
    apply_forward_diff,
    apply_laplacian,
    coupling_nonlinearity,
    cross_term_inequality,
    difference_energy,
    energy,
    eval_drift,
    local_lipschitz_constants,
    saturation_nonlinearity,
)
from .measures import (
    CutoffProfile,
    EmpiricalMeasure,
    second_moment,
    tail_mass,
    weighted_second_moment,
)
from .rng import SeedSpec, sample_jump_batch, sample_wiener_increments

__version__ = "0.1.0"
