"""Graded trigonometric R-matrices, their identity battery, commuting
difference operators, and q-deformed long-range spin chains."""

__version__ = "0.1.0"

from .gradedcore import (
    DENSE_SITE_CAP,
    ChainOperator,
    ChainState,
    GradedDim,
    LocalOperator,
    ProductTerm,
    apply,
    commutator_norm,
    embed,
    embed_local,
    graded_permutation,
    identity_operator,
    matrix_units,
    parity,
    random_state,
    sigma_mask,
    super_multiply,
)
from .rmatrix import (
    FactorizationError,
    PoleError,
    RFamily,
    RMatrixSpec,
    ScalarKernel,
    TwistData,
    build_f_derivative,
    build_r,
    build_r_normalized,
    c_matrix,
    c_matrix_closed_form,
    c_prefactor,
    normalized_closed_form,
    phi,
    residue_at_zero,
    r_transposed,
    scalar_kernels,
    sign_int,
    twist_data,
)
from .verify import (
    IdentityCheck,
    VerificationReport,
    check_aybe,
    check_aybe_z_independence,
    check_kernel_reconstruction,
    check_normalized_unitarity,
    check_periodicity,
    check_qybe,
    check_residue,
    check_scalar_relations,
    check_skew,
    check_twist,
    check_unitarity,
    default_specs,
    mutated_r_builder,
    run_battery,
)
from .qmrops import (
    DifferenceOperator,
    SiteConfig,
    SubsetTerm,
    TestFunction,
    commutator_eval,
    f_identity,
    f_identity_eta_spread,
    f_identity_residual,
    random_test_function,
    scalar_commutator_eval,
    scalar_d,
    spin_d,
)
from .chain import (
    DEFAULT_HBAR,
    FrozenChain,
    SpectrumResult,
    anisotropic_target,
    c_factorized_h1,
    equilibrium_points,
    frozen_chain,
    haldane_shastry_target,
    hamiltonian_h1,
    hamiltonian_h2,
    htilde1_constant,
    htilde_k,
    limit_target,
    load_operator_binary,
    nonrelativistic_limit_h1,
    phi_sum_identity,
    save_operator_binary,
    site_gauge_conjugation,
    spectrum,
    spectrum_to_csv,
)
