"""Hyperspectral unmixing toolkit.

Linear-mixing-model primitives, eleven NMF-family solvers, geometric
initialization (VCA + FCLS), a seeded synthetic benchmark scene
generator, ground-truth labeling, SAD/RMSE evaluation, portable cube
files, and a benchmarking CLI.
"""

from .errors import (
    CubeFormatError,
    DegenerateColumnError,
    DegenerateSubspaceError,
    DivergenceError,
    GenerationError,
    LineSearchStallError,
    ShapeError,
    UnmixingError,
)
from .evaluation import BenchmarkReport, evaluate, match_endmembers, rmse, sad
from .graph import GraphSpec, LaplacianPair, build_graph
from .initializers import fcls, init_pair, vca
from .labeling import (
    ClassLabelMap,
    EndmemberSeeds,
    GroundTruth,
    LabelingCriteria,
    SeedSource,
    hyc_transform,
    label_abundances,
    label_endmembers,
    label_ground_truth,
    verify_labeling,
)
from .model import (
    AbundanceMatrix,
    EndmemberMatrix,
    HyperCube,
    LossKind,
    augment_asc,
    default_asc_delta,
    loss,
    project_sum_to_one,
    reconstruct,
)
from .solvers import (
    SolveResult,
    SolverConfig,
    SolverState,
    VARIANTS,
    cenmf_step,
    edc_dissimilarity,
    edcnmf_step,
    gini_sparsity,
    multiplicative_step,
    mvc_objective,
    mvcnmf_step,
    pca_basis,
    rrlbs_step,
    simplex_volume,
    solve,
)
from .synthetic import (
    SceneConfig,
    SyntheticScene,
    add_noise,
    generate_abundances,
    generate_library,
    generate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "AbundanceMatrix",
    "BenchmarkReport",
    "ClassLabelMap",
    "CubeFormatError",
    "DegenerateColumnError",
    "DegenerateSubspaceError",
    "DivergenceError",
    "EndmemberMatrix",
    "EndmemberSeeds",
    "GenerationError",
    "GraphSpec",
    "GroundTruth",
    "HyperCube",
    "LabelingCriteria",
    "LaplacianPair",
    "LineSearchStallError",
    "LossKind",
    "SceneConfig",
    "SeedSource",
    "ShapeError",
    "SolveResult",
    "SolverConfig",
    "SolverState",
    "SyntheticScene",
    "UnmixingError",
    "VARIANTS",
    "add_noise",
    "augment_asc",
    "build_graph",
    "cenmf_step",
    "default_asc_delta",
    "edc_dissimilarity",
    "edcnmf_step",
    "evaluate",
    "fcls",
    "generate_abundances",
    "generate_library",
    "generate_scene",
    "gini_sparsity",
    "hyc_transform",
    "init_pair",
    "label_abundances",
    "label_endmembers",
    "label_ground_truth",
    "loss",
    "match_endmembers",
    "multiplicative_step",
    "mvc_objective",
    "mvcnmf_step",
    "pca_basis",
    "project_sum_to_one",
    "reconstruct",
    "rmse",
    "rrlbs_step",
    "sad",
    "simplex_volume",
    "solve",
    "vca",
    "verify_labeling",
]
