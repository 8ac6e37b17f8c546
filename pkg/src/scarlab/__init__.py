"""scarlab: exact diagonalization of tunable blockade spin chains."""

from .config import InvalidConfigError, SpinChainConfig
from .basis import BasisMismatchError, ChainBasis, full_basis, encode_state, decode_state
from .operators import (
    SparseOperator,
    anticommutator,
    collective_operator,
    commutator,
    embed_one_site,
    embed_two_site,
    local_spin_matrices,
    projector,
)
from .model import (
    ModelOperators,
    blockade_identity_check,
    build_blockade_projector,
    build_collective_generator,
    build_counting_operator,
    build_deformed_generator,
    build_hamiltonian,
    build_Q_operators,
    build_R_operator,
    build_spinhalf_tower,
    build_unitary,
    commutator_residual,
)
from .sectors import (
    Sector,
    connectivity_fragments,
    decompose_by_C,
    frozen_pattern_subsectors,
    momentum_sectors,
    project_operator,
)
from .spectral import SpectralData, diagonalize, level_statistics, r_statistic, unfolded_spacings
from .quench import Trajectory, evolve, initial_state, revival_metrics
from .scars import (
    ScarTower,
    approximate_ground_state,
    bipartite_entropy,
    detect_scar_tower,
    eigenstate_overlaps,
    generate_tower,
    ladder_fidelity,
    optimize_alpha,
    scar_spacing_report,
)
from .pxp import build_magnon_ops, build_pxp, build_spin1_LR_form, lucas_number, spin1_to_pxp
from .generalized import generalized_model, hpxp_equivalence

__version__ = "0.1.0"
