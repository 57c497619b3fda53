"""Numerical laboratory for positive-energy Dirac fields, detector effects,
and a configuration jump process on a truncated Fock lattice."""

from .belljump import (
    EquivarianceResult,
    FockLatticeState,
    LatticeConfig,
    Trajectory,
    build_hamiltonian,
    configurations,
    equivariance_test,
    joint_region_probability,
    jump_rates,
    schrodinger_step,
    simulate_trajectory,
)
from .config import ExperimentConfig, experiment_names, parse_config
from .errors import (
    ConfigParseError,
    ConfigurationError,
    DegenerateInputError,
    InvalidInputError,
    LabError,
    StrandedConfigurationError,
    UndefinedFractionError,
    WindowTooFarError,
)
from .experiments import RunManifest, run_experiment
from .evolution import (
    CausalityReport,
    PotentialProfile,
    box_potential,
    causality_check,
    evolve_free,
    evolve_with_potential,
    fragility_scan,
    gaussian_well,
    zero_potential,
)
from .localization import (
    Region,
    TailFit,
    coincidence_gap,
    min_localization,
    min_localization_unconstrained,
    newton_wigner_state,
    tail_decay_rate,
)
from .povm import (
    CommutatorReport,
    DetectorOperator,
    build_indicator,
    build_projected_indicator,
    click_probability,
    commutator_norm,
    translate_operator,
)
from .spectral import (
    EnergySplit,
    MomentumGrid,
    SimulationParams,
    SpinorField,
    dirac_symbol,
    energy_projector,
    make_positive_packet,
    negative_fraction,
    split_energy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
