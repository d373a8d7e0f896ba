"""Numerical laboratory for Gambaudo–Ghys quasimorphisms on the disk.

Area-preserving disk maps are traced into braids, braids are pushed
through counting quasimorphisms on the Farey graph, and the stabilized
values yield entropy-Lipschitz quasimorphisms, norm lower bounds, and
quasi-isometric Z^m embedding certificates.
"""

from .errors import (
    DiskbraidError,
    ConfigError,
    SamplingError,
    BudgetError,
    DegeneracyError,
    CollisionError,
    ResolutionError,
)
from .dynamics import (
    RigidRotation,
    AnnulusTwist,
    HamiltonianPush,
    RadialFlow,
    StripShear,
    DiskMap,
    identity,
    compose,
    power,
    egg_beater,
    miniature_beater,
    sample_map,
    primitive_catalog,
    conjugate_by_rotation,
)
from .braids import BraidWord, word, sl2_image, braid_key, equal
from .cocycle import (
    TraceOptions,
    TraceResult,
    extract_braid,
    extract_braids_batch,
    connector_braid,
    cocycle_check,
    cocycle_report,
    braid_support_histogram,
)
from .farey import (
    Slope,
    INF,
    slope,
    parse_slope,
    distance,
    bfs_distance,
    geodesic,
    geodesic_union,
    corridor,
    translation_length,
    turn_number,
    turn_word,
)
from .quasimorphism import (
    OmegaSpec,
    QmSpec,
    QmValue,
    c_omega,
    psi_omega,
    qm_value,
    homogenize,
    defect_estimate,
    matrix_pair_sampler,
    single_turn_pattern,
    turn_band_qm,
    axis_segment,
)
from .ggop import MCConfig, GGEstimate, gg_raw, gg_stab, gg_stab_multi, vanishing_check, braid_psi
from .entropy import (
    EntropyEstimate,
    braid_entropy_sl2,
    braid_entropy_dynnikov,
    bowen_entropy,
    curve_growth,
)
from .norms import (
    NormBoundRow,
    NormBoundReport,
    EmbeddingCertificate,
    TrialBound,
    map_id,
    qm_row,
    entropy_norm_lower,
    build_disjoint_family,
    zm_embedding_report,
)

__version__ = "0.1.0"

__all__ = [
    "DiskbraidError", "ConfigError", "SamplingError", "BudgetError",
    "DegeneracyError", "CollisionError", "ResolutionError",
    "RigidRotation", "AnnulusTwist", "HamiltonianPush", "RadialFlow",
    "StripShear", "DiskMap", "identity", "compose", "power", "egg_beater",
    "miniature_beater", "sample_map", "primitive_catalog",
    "conjugate_by_rotation",
    "BraidWord", "word", "sl2_image", "braid_key", "equal",
    "TraceOptions", "TraceResult", "extract_braid", "extract_braids_batch",
    "connector_braid", "cocycle_check", "cocycle_report",
    "braid_support_histogram",
    "Slope", "INF", "slope", "parse_slope", "distance", "bfs_distance",
    "geodesic", "geodesic_union", "corridor", "translation_length",
    "turn_number", "turn_word",
    "OmegaSpec", "QmSpec", "QmValue", "c_omega", "psi_omega", "qm_value",
    "homogenize", "defect_estimate", "matrix_pair_sampler",
    "single_turn_pattern", "turn_band_qm", "axis_segment",
    "MCConfig", "GGEstimate", "gg_raw", "gg_stab", "gg_stab_multi",
    "vanishing_check", "braid_psi",
    "EntropyEstimate", "braid_entropy_sl2", "braid_entropy_dynnikov",
    "bowen_entropy", "curve_growth",
    "NormBoundRow", "NormBoundReport", "EmbeddingCertificate", "TrialBound",
    "map_id", "qm_row", "entropy_norm_lower", "build_disjoint_family",
    "zm_embedding_report",
    "__version__",
]
