"""p-diluted phase-disordered discrete-time quantum walk simulator."""

from .analysis import (
    CrossingPoint,
    Distribution,
    PowerLawFit,
    crossing_point,
    crw_reference,
    fit_beta,
    mean_position,
    similarity,
    variance,
)
from .disorder import (
    DEFAULT_ALPHABET,
    DisorderSpec,
    PhaseMap,
    generate_phase_map,
    load_map,
    realized_fraction,
    save_map,
    zero_map,
)
from .ensemble import EnsembleResult, SimilarityScan, run_ensemble, similarity_scan
from .errors import (
    AmbiguityError,
    CapacityError,
    ConfigError,
    DomainError,
    MapParseError,
    PdqwError,
)
from .two_photon import (
    CoincidenceMatrix,
    HomScan,
    PairEnsemble,
    PairInput,
    hom_scan,
    pair_marginal,
    run_pair_ensemble,
    site_coincidences,
    two_photon_mode_distribution,
    variance2,
)
from .walk_core import (
    WalkState,
    apply_step,
    coin_from_reflectivity,
    evolve,
    hadamard_coin,
    initial_state,
    mode_index,
    position_distribution,
    single_particle_unitary,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "CapacityError",
    "CoincidenceMatrix",
    "ConfigError",
    "CrossingPoint",
    "DEFAULT_ALPHABET",
    "DisorderSpec",
    "Distribution",
    "DomainError",
    "EnsembleResult",
    "HomScan",
    "MapParseError",
    "PairEnsemble",
    "PairInput",
    "PdqwError",
    "PhaseMap",
    "PowerLawFit",
    "SimilarityScan",
    "WalkState",
    "apply_step",
    "coin_from_reflectivity",
    "crossing_point",
    "crw_reference",
    "evolve",
    "fit_beta",
    "generate_phase_map",
    "hadamard_coin",
    "hom_scan",
    "initial_state",
    "load_map",
    "mean_position",
    "mode_index",
    "pair_marginal",
    "position_distribution",
    "realized_fraction",
    "run_ensemble",
    "run_pair_ensemble",
    "save_map",
    "similarity",
    "similarity_scan",
    "single_particle_unitary",
    "site_coincidences",
    "two_photon_mode_distribution",
    "variance",
    "variance2",
    "zero_map",
]
