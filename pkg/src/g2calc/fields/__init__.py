"""Structure fields on periodic grids and their differential calculus."""
from .grid import GridSpec, partial_on_grid
from .structure import StructureField
from .generate import generate_field, fourier_matrix, fourier_scalar
from .fieldio import (
    ALT3_TRIPLES,
    components_to_phi,
    load_field,
    phi_to_components,
    save_field,
)
from .calculus import (
    CurvatureField,
    christoffel,
    codifferential,
    curl,
    curvature,
    exterior_derivative,
    lie_derivative_metric,
    lie_derivative_phi,
    nabla,
    nabla_g_residual,
    nabla_phi,
    nabla_psi,
    partial_tensor,
    ricci_identity_residual,
    second_bianchi_residual,
)
from .laplacian import (
    hodge_laplacian_closed,
    hodge_laplacian_phi,
    laplacian_residuals,
    rough_laplacian_closed,
    rough_laplacian_phi,
)
from .transform import (
    conformal_residuals,
    scaling_residuals,
    transform_conformal,
    transform_scaling,
)
from .torsion import (
    TorsionPackage,
    bianchi_residuals,
    lie_derivative_phi_framed,
    mat_mul,
    mat_vec,
    optimal_connection_check,
    ric_F_from_torsion,
    ric_F_residuals,
    torsion,
    torsion_identities,
)

__all__ = [
    "GridSpec",
    "StructureField",
    "partial_on_grid",
    "generate_field",
    "fourier_scalar",
    "fourier_matrix",
    "ALT3_TRIPLES",
    "components_to_phi",
    "load_field",
    "phi_to_components",
    "save_field",
    "CurvatureField",
    "christoffel",
    "codifferential",
    "curl",
    "curvature",
    "exterior_derivative",
    "lie_derivative_metric",
    "lie_derivative_phi",
    "nabla",
    "nabla_g_residual",
    "nabla_phi",
    "nabla_psi",
    "partial_tensor",
    "ricci_identity_residual",
    "second_bianchi_residual",
    "hodge_laplacian_closed",
    "hodge_laplacian_phi",
    "laplacian_residuals",
    "rough_laplacian_closed",
    "rough_laplacian_phi",
    "conformal_residuals",
    "scaling_residuals",
    "transform_conformal",
    "transform_scaling",
    "TorsionPackage",
    "bianchi_residuals",
    "lie_derivative_phi_framed",
    "mat_mul",
    "mat_vec",
    "optimal_connection_check",
    "ric_F_from_torsion",
    "ric_F_residuals",
    "torsion",
    "torsion_identities",
]
