"""Fast shift-orthogonal projections, an explicit plane wave basis, and a
split-Bregman compressed plane wave solver on periodic lattices."""

__version__ = "0.1.0"

from .lattice import (
    CoeffTensor,
    DomainMismatchError,
    LatticeDomain,
    flatten,
    gram_shift,
    random_tensor,
    shift,
    shift_inner,
    unflatten,
)
from .btransform import b_inverse, b_transform
from .projection import (
    FallbackVector,
    InfeasibleDeflationError,
    ModePreconditionError,
    ProjectionConfig,
    SsoReport,
    ShiftPerpReport,
    check_shift_perpendicular,
    is_shift_orthogonal,
    project_sso,
    project_sso_orth,
    theta_normalize,
)
from .sopw import (
    AliasingError,
    CertificateReport,
    DerivativeStencil,
    FourierRep,
    SopwBasis1D,
    analyze_grid,
    eval_closed_form,
    first_derivative_stencil,
    fourier_samples,
    fourier_to_sopw,
    shell_moment_sums,
    second_derivative_stencil,
    sopw_fourier_coeffs,
    sopw_to_fourier,
    synthesize_grid,
    verify_variational_certificate,
)
from .cpw import (
    CpwConfig,
    CpwDiagnostics,
    CpwMode,
    CpwModeSet,
    CpwState,
    cpw_energy,
    default_bregman_penalty,
    helmholtz_solve,
    shrink,
    solve_cpw_mode,
    solve_cpw_modes,
    support_fraction,
)

__all__ = [
    "AliasingError",
    "CertificateReport",
    "CoeffTensor",
    "CpwConfig",
    "CpwDiagnostics",
    "CpwMode",
    "CpwModeSet",
    "CpwState",
    "DerivativeStencil",
    "DomainMismatchError",
    "FallbackVector",
    "FourierRep",
    "InfeasibleDeflationError",
    "LatticeDomain",
    "ModePreconditionError",
    "ProjectionConfig",
    "ShiftPerpReport",
    "SopwBasis1D",
    "SsoReport",
    "analyze_grid",
    "b_inverse",
    "b_transform",
    "check_shift_perpendicular",
    "cpw_energy",
    "default_bregman_penalty",
    "eval_closed_form",
    "first_derivative_stencil",
    "flatten",
    "fourier_samples",
    "fourier_to_sopw",
    "gram_shift",
    "helmholtz_solve",
    "is_shift_orthogonal",
    "shell_moment_sums",
    "project_sso",
    "project_sso_orth",
    "random_tensor",
    "second_derivative_stencil",
    "shift",
    "shift_inner",
    "shrink",
    "solve_cpw_mode",
    "solve_cpw_modes",
    "sopw_fourier_coeffs",
    "sopw_to_fourier",
    "support_fraction",
    "synthesize_grid",
    "theta_normalize",
    "unflatten",
    "verify_variational_certificate",
]
