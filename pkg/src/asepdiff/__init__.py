"""Diffusion matrix of finite-range asymmetric simple exclusion processes.

The package computes the matrix D of the fluctuation-dissipation
decomposition of the particle currents,

    w_i = sum_j D_ij (xi(0) - xi(e_j)) + (generator range term),

by Galerkin truncation of the fluctuation space over translation classes of
centered-occupation monomials, and verifies the supporting exact identities
(translation nullity, the gradient pairing lemma, reflection covariance)
against brute-force oracles, exactly in rational mode.
"""

from .diffusion import (
    DiffusionReport,
    LevelReport,
    RepresentationSpace,
    build_representation_space,
    compute_diffusion,
    convergence_study,
    direct_decomposition,
    q_and_d,
    represent_gradient,
)
from .errors import (
    AsepdiffError,
    BoxTooLarge,
    ConfigError,
    DensityMismatch,
    DuplicateVector,
    KernelError,
    MonotonicityError,
    NegativeWeight,
    NonCenteredInput,
    NotInG,
    NotNormalized,
    SingularDirichlet,
    SingularQ,
    SolverError,
    UncoveredSite,
    ZeroSiteWeight,
)
from .fluctuation import (
    FluctuationSpace,
    FluctuationVector,
    QuotientBasis,
    TranslationClass,
    build_quotient_basis,
    dirichlet_matrix,
    h_inner,
    pair_rho0,
    reduce_to_classes,
    t_vec,
)
from .generator import (
    CurrentSet,
    GeneratorKind,
    apply_generator,
    check_commutation,
    make_currents,
)
from .identities import CheckItem, run_identity_suite
from .kernel import (
    IrreducibilityReport,
    JumpKernel,
    build_kernel,
    check_irreducibility,
    kernel_from_json_dict,
    load_kernel,
)
from .localfn import (
    Density,
    LocalFunction,
    in_G_rho,
    multiply,
    project_to_G,
)
from .oracle import (
    Configuration,
    exact_covariance,
    exact_expectation,
    exact_expectation_derivative,
    generator_pointwise,
    pair_rho0_bruteforce,
    t_vec_bruteforce,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
