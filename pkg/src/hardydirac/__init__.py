"""Two-weight Hardy constants, Hardy-Dirac inequalities, and the
distinguished self-adjoint extension of radial Dirac operators with
diagonal (including delta-shell) potentials."""

from .numerics import (
    BandedHermitianMatrix,
    NotPositiveDefiniteError,
    Quadrant,
    QuadratureError,
    RadialGrid,
    SupResult,
    UnboundedError,
    eig_banded_hermitian,
    integrate_radial,
    solve_banded_hermitian,
    sup_over_r,
)
from .potentials import (
    CoulombPotential,
    HardyConstants,
    MollifiedShell,
    NotInClassAError,
    PotentialPair,
    PotentialParseError,
    PowerPotential,
    ShellMeasure,
    SumPotential,
    TablePotential,
    ZeroPotential,
    a_k,
    a_minus,
    a_plus,
    hardy_constants,
    parse_component,
    parse_pair,
    parse_v1_slot,
    scale_pair,
    tilde_constants,
)
from .channels import (
    Channel,
    ClosedFormProfile,
    GridProfile,
    SpinorField,
    build_field,
    channel_weights,
    evaluate_spinor,
    exp_profile,
    field_norm_weighted,
    gauss_profile,
    lattice_sigma_grad_norm,
    lattice_weighted_norm,
    parse_field_term,
    parse_profile,
    radial_sigma_grad,
    sigma_grad_norm_weighted,
)
from .verify import (
    ExtremizeResult,
    GapParameters,
    HypothesisViolationError,
    InequalityReport,
    MollifiedRow,
    extremize_ratio,
    hardy_lhs,
    hardy_rhs_theorem,
    mollified_delta_experiment,
    random_field_gallery,
    select_lambda,
    standard_pair_gallery,
    verify_corollary,
    verify_theorem,
)
from .extension import (
    ApplyHResult,
    ConvergenceError,
    DiracChannelProblem,
    GapEigenvalue,
    WeakSolveResult,
    apply_H,
    h_inner_product,
    norm_equivalence_probe,
    pairing_defect,
    shell_spectrum_demo,
    spectrum_in_gap,
    weak_solve,
)

__version__ = "0.1.0"
