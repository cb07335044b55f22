"""Cavity-QED entanglement purification with coherent-field ancillas."""

from .bell import (
    BELL_LABELS,
    FourQubitState,
    MeasurementOutcome,
    QubitPairState,
    b_unitaries,
    bell_diag_state,
    bell_vectors,
    embed_two_qubit_map,
    measure_pair,
    pair_product,
    rho_psi,
    twirl_bell_diagonal,
    twirl_werner,
    werner_state,
)
from .channels import TwoQubitChannel, load_channel, save_channel
from .config import SimConfig, build_config, load_config_file
from .errors import (
    CavpurifyError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    NumericalError,
    PreconditionError,
    TruncationError,
    UndefinedFidelityError,
)
from .fock import (
    FieldVector,
    QuadratureSpec,
    coherent_amplitudes,
    hermite_functions,
    husimi_grid,
    husimi_q,
    quadrature_wavefunction,
    truncation_dim,
)
from .jc import (
    AtomFieldState,
    BranchDecomposition,
    RegimeDiagnostics,
    branch_decompose,
    branch_state,
    coherent_overlap,
    coherent_overlap_asymptotic,
    evolve_sequential,
    jcm_step,
    validate_regime,
)
from .open_system import LossParams, apply_channel, extract_channel, liouvillian_apply, propagate
from .postselect import (
    PostselectedState,
    fidelity_star,
    ideal_m,
    ph_asymptotics,
    project_coherent,
    project_quadrature,
    quadrature_pdf,
    success_probability,
    w2_kraus,
)
from .purify import (
    ProtocolStepResult,
    Trajectory,
    compare_protocols,
    iterate,
    recursion_aB,
    recursion_aB_mixed,
    recursion_aD,
    resource_table,
    step_aB,
    step_aD,
)

__version__ = "0.1.0"
