"""Numerical calculus for G2-structures.

Subpackage layout: :mod:`g2calc.frame` and :mod:`g2calc.algebra` cover the
pointwise tensor algebra, :mod:`g2calc.reps` the representation-theoretic
decompositions, :mod:`g2calc.fields` discretized structures on flat tori,
:mod:`g2calc.symbols` principal-symbol analysis, :mod:`g2calc.flow` the
geometric flow integrator, and :mod:`g2calc.cli` / :mod:`g2calc.service` the
command line and HTTP front ends.
"""
from .frame import (
    PHI0,
    DenseTensor,
    FramePoint,
    NotPositive,
    Sym,
    flat_point,
    hodge_star,
    identity_suite,
    levi_civita,
    metric_from_phi,
)
from .algebra import (
    Tensor2Decomp,
    circledcirc,
    cross,
    decompose_form3,
    decompose_form4,
    decompose_tensor2,
    diamond,
    p_op,
    v_op,
)
from .reps import (
    CurvLike,
    CurvatureBlocks,
    Decomp7x14,
    Decomp7x27,
    DecompS214,
    FirstBianchiViolation,
    NotIn7x14,
    NotIn7x27,
    NotIn64,
    NotInS214,
    NotWeyl,
    curvature_blocks,
    decompose_7x14,
    decompose_7x27,
    decompose_S2_14,
    iota_g,
    iota_phi,
    iso64,
    iso64_inverse,
    p_sandwich_suite,
    rho_g,
    rho_phi,
    w27_extract,
    weyl_split,
)

__version__ = "0.1.0"

__all__ = [
    "PHI0",
    "CurvLike",
    "CurvatureBlocks",
    "Decomp7x14",
    "Decomp7x27",
    "DecompS214",
    "DenseTensor",
    "FirstBianchiViolation",
    "FramePoint",
    "NotIn64",
    "NotIn7x14",
    "NotIn7x27",
    "NotInS214",
    "NotPositive",
    "NotWeyl",
    "Sym",
    "Tensor2Decomp",
    "__version__",
    "circledcirc",
    "cross",
    "curvature_blocks",
    "decompose_7x14",
    "decompose_7x27",
    "decompose_S2_14",
    "decompose_form3",
    "decompose_form4",
    "decompose_tensor2",
    "diamond",
    "flat_point",
    "hodge_star",
    "identity_suite",
    "iota_g",
    "iota_phi",
    "iso64",
    "iso64_inverse",
    "levi_civita",
    "metric_from_phi",
    "p_op",
    "p_sandwich_suite",
    "rho_g",
    "rho_phi",
    "v_op",
    "w27_extract",
    "weyl_split",
]
