"""Lipschitz-free spaces over finite metric spaces: norms, certificates and
classification of molecules."""

from .errors import *  # noqa: F401,F403
from .metric import (
    Config,
    DEFAULT_CONFIG,
    FiniteMetricSpace,
    PairId,
    SpaceDiagnostics,
    gromov_product,
    is_resolved,
    mesh_size,
    metric_segment,
    midpoint_defect,
    midpoint_set,
    pair_z_margin,
    space_diagnostics,
    validate_space,
)
from .lipschitz import (
    AveragingResult,
    LipschitzFunction,
    SlopeWitness,
    averaging_family,
    daugavet_extension,
    distance_to,
    f_xy,
    lip_norm,
    mcshane_extend,
    peaking_candidate,
    spread_slope_pairs,
    whitney_extend,
)
from .free_space import (
    Chain,
    DualCertificate,
    FlowSolution,
    Molecule,
    kr_norm,
    kr_norm_dual,
    kr_norm_primal,
    molecule,
    molecule_decompose,
    slice_membership,
    tol_gap,
)
from .daugavet import (
    ClassificationSummary,
    ContractionResult,
    DaugavetSearchResult,
    LocalSlopeResult,
    PairClassification,
    Verdict,
    classify_all,
    classify_pair,
    contraction_probe,
    daugavet_margin,
    find_daugavet_pair,
    gromov_infimum,
    lemalocal_experiment,
    local_slope_search,
    peak_verify,
    slice_daugavet_witness,
    spreading_local_set,
)
from .gallery import SpaceSpec, build, gallery, shortest_path_closure
from .spaceio import dumps_space, load_space, loads_space, save_space

__version__ = "0.1.0"
