"""qent: does a spatial region's entanglement see the particle inside it?

Exact lattice Fock-space machinery for building localized-particle states
above gapped free-chain vacuums, reducing them to spatial regions, and
comparing the vacuum-subtracted Renyi/von Neumann entropies against the
two-particle quantum-mechanical reference.
"""

__version__ = "0.1.0"

from .entangle import (
    DensityMatrix,
    EntropyReport,
    Region,
    reduced_density_matrix,
    renyi_entropy,
    renyi_trace,
    spectrum,
    vacuum_subtracted_report,
    von_neumann_entropy,
)
from .errors import ConfigError, CutoffError, DimensionCapError, NumericalError, QentError
from .excitations import (
    PacketOperator,
    PacketProfile,
    RecipeTerm,
    StateRecipe,
    build_state,
    make_packet,
    packet_overlap,
)
from .fock import (
    FockBasis,
    ModeLabel,
    StateVector,
    Statistics,
    apply_annihilation,
    apply_creation,
    basis_state,
    check_operator_identities,
    enumerate_basis,
    inner,
    vacuum_state,
)
from .model import (
    Boundary,
    LatticeModel,
    SingleParticleModes,
    VacuumRegime,
    build_vacuum,
    diagonalize_modes,
    modes_for,
    single_particle_hamiltonian,
    spectral_gap,
)
from .qmref import QMState, ResidualRecord, compare, overlap_scan, qm_density_matrix, qm_renyi
from .replica import (
    ReplicaPermutation,
    check_pproperty,
    e_matrix_element,
    leading_vs_full,
    replica_trace,
)
