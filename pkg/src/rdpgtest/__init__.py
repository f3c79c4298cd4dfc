"""Two-sample latent position tests for random dot product graphs.

Generate or load a pair of graphs on one aligned vertex set, embed each
adjacency matrix spectrally, and test whether the generating latent
positions agree up to an orthogonal transformation, a global scale, or a
positive diagonal transformation — with theoretical or bootstrap
calibration, and a block-partition bootstrap for graphs too large to
resample whole.
"""

__version__ = "0.1.0"

from .alignment import (
    ProcrustesSolution,
    frobenius_normalize,
    orthogonal_procrustes,
    procrustes_distance,
    sphere_project,
)
from .errors import (
    BlockTooSmall,
    DegenerateGamma,
    DimensionMismatch,
    DimensionTooLarge,
    EigSolverFailure,
    InvalidLatentPositions,
    InvalidThreshold,
    NotPositiveSemidefinite,
    ParseError,
    RankDeficient,
    RdpgTestError,
    ShapeMismatch,
    SizeMismatch,
    VertexOutOfRange,
    VertexSetMismatch,
    ZeroMatrix,
    ZeroRow,
)
from .experiments import (
    CelegansResult,
    PowerCell,
    ScenarioConfig,
    ScenarioRun,
    StatisticSample,
    run_celegans,
    run_community,
    run_dcsbm,
    run_scenario,
    run_table1,
    run_table2,
    write_power_csv,
    write_samples_csv,
)
from .graph_io import (
    EdgeListResult,
    read_edge_list,
    read_latent_csv,
    write_edge_list,
    write_latent_csv,
)
from .graphs import (
    BlockModelSpec,
    Graph,
    LatentPositions,
    dcsbm_latent_positions,
    sample_assignments,
    sample_rdpg,
    sbm_latent_positions,
)
from .rng import derive_seed, generator, splitmix64
from .spectral import (
    AdjacencySpectralEmbedding,
    AssumptionCheck,
    Embedding,
    SpectralDiagnostics,
    ase,
    check_assumption1,
    diagnostics,
    dimension_select,
    noise_constant,
)
from .testing import (
    DEFAULT_THRESHOLD,
    LatentPositionTest,
    TestKind,
    TestResult,
    baseline_frobenius,
    bootstrap_pvalue,
    chi2_upper_tail,
    compute_statistic,
    fisher_statistic,
    statistic_diagonal,
    statistic_identity,
    statistic_scaling,
    subgraph_bootstrap,
    theoretical_decision,
    two_sample_test,
)

__all__ = [
    "AdjacencySpectralEmbedding",
    "AssumptionCheck",
    "BlockModelSpec",
    "BlockTooSmall",
    "CelegansResult",
    "DEFAULT_THRESHOLD",
    "DegenerateGamma",
    "DimensionMismatch",
    "DimensionTooLarge",
    "EdgeListResult",
    "EigSolverFailure",
    "Embedding",
    "Graph",
    "InvalidLatentPositions",
    "InvalidThreshold",
    "LatentPositionTest",
    "LatentPositions",
    "NotPositiveSemidefinite",
    "ParseError",
    "PowerCell",
    "ProcrustesSolution",
    "RankDeficient",
    "RdpgTestError",
    "ScenarioConfig",
    "ScenarioRun",
    "ShapeMismatch",
    "SizeMismatch",
    "SpectralDiagnostics",
    "StatisticSample",
    "TestKind",
    "TestResult",
    "VertexOutOfRange",
    "VertexSetMismatch",
    "ZeroMatrix",
    "ZeroRow",
    "ase",
    "baseline_frobenius",
    "bootstrap_pvalue",
    "check_assumption1",
    "chi2_upper_tail",
    "compute_statistic",
    "dcsbm_latent_positions",
    "derive_seed",
    "diagnostics",
    "dimension_select",
    "fisher_statistic",
    "frobenius_normalize",
    "generator",
    "noise_constant",
    "orthogonal_procrustes",
    "procrustes_distance",
    "read_edge_list",
    "read_latent_csv",
    "run_celegans",
    "run_community",
    "run_dcsbm",
    "run_scenario",
    "run_table1",
    "run_table2",
    "sample_assignments",
    "sample_rdpg",
    "sbm_latent_positions",
    "sphere_project",
    "splitmix64",
    "statistic_diagonal",
    "statistic_identity",
    "statistic_scaling",
    "subgraph_bootstrap",
    "theoretical_decision",
    "two_sample_test",
    "write_edge_list",
    "write_latent_csv",
    "write_power_csv",
    "write_samples_csv",
]
