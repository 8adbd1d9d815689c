"""Simulation toolkit for non-Hermitian two-leg ladders with mismatched
lattice constants: exact spectra, PT-breaking phase diagrams, and the
distinct probability dynamics of the tetramerized, crossover, and dimerized
regions of the resulting long-period pattern."""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED, backend
from .dynamics import (
    ClusterRegime,
    Trajectory,
    cluster_regime,
    dimer_period,
    dimer_probability,
    ep_state_2x2,
    evolve,
    first_recurrence_minimum,
    region_probabilities,
    tetramer_period,
    tetramer_probability,
    uniform_state,
)
from .hamiltonian import (
    ModelParams,
    build_crossover,
    build_dimerized,
    build_moire,
    build_tetramerized,
    cluster_site_groups,
    dimer_cluster,
    flat_index,
    ladder_site_groups,
    leg_exchange_blocks,
    moire_site_groups,
    parity_operator,
    pt_residual,
    site_of_index,
    tetramer_cluster,
)
from .lattice import (
    CouplingTable,
    MoireSpec,
    Region,
    RegionLabels,
    build_couplings,
    classify_regions,
    minimal_label_period,
)
from .linalg import (
    EigenConvergenceError,
    EigenDecomposition,
    ExpmOverflowError,
    eig,
    eigvals,
    eigvals_batch,
    expm,
    integrate_schrodinger,
)
from .spectra import (
    Dispersion,
    GammaCritical,
    PhaseDiagramGrid,
    analytic_gamma_c,
    critical_gamma,
    crossover_kernel,
    dimer_bands,
    dimer_eps0,
    dimer_kernel,
    dispersion_crossover,
    dispersion_dimer,
    dispersion_tetramer,
    k_grid,
    phase_diagram,
    tetramer_eps0,
    tetramer_gap,
)
