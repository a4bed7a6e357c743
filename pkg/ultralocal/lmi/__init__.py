from ultralocal.lmi.affine import AffineExpr, DecisionLayout
from ultralocal.lmi.inequalities import (
    AffineMatrixInequality,
    LmiBlocks,
    assemble_l2_lmi,
    assemble_l2linf_lmis,
    assemble_stability_lmi,
    build_x11_x12,
    default_epsilon,
    synthesis_layout,
)
from ultralocal.lmi.line_search import (
    DEFAULT_A_GRID,
    DEFAULT_B_GRID,
    AllInfeasible,
    LineSearchEntry,
    LineSearchResult,
    NumericalFailure,
    SynthesisFailed,
    line_search,
)
from ultralocal.lmi.synthesis import CertifiedBounds, DesignMode, SynthesisParams, SynthesisProblem, assemble_synthesis_problem, export_sdpa
