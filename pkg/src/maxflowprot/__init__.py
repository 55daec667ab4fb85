"""Protection planning for unit-capacity max-flow networks."""

__version__ = "0.1.0"

from .coding import (
    CodeAssignment,
    CodingMatrix,
    assign_precut_vectors,
    cauchy_matrix,
    decode,
    dump_matrix,
    encode,
    matrix_for,
    parse_matrix,
    systematic_transform,
)
from .connectivity import (
    ConnectivityReport,
    PreCutSubgraph,
    build_precut_subgraph,
    classify_node,
    connectivity_report,
    ec,
    esc_total,
    partition_pre_post,
)
from .exact import (
    ExactSolution,
    IlpModel,
    McgReduction,
    SearchBudget,
    assignment_for,
    emit_model,
    parse_model,
    reduce_mcg,
    solve_exact,
    validate_assignment,
)
from .generator import GeneratorConfig, generate_batch, generate_instance
from .graph import (
    CommodityRouting,
    CutSet,
    FlowAssignment,
    GraphFormatError,
    NetworkGraph,
    assert_unique_min_cut,
    decompose_into_paths,
    group_flow,
    max_flow,
    min_cut,
    parse_graph,
    serialize_graph,
)
from .harness import (
    ComparisonResult,
    DeliveryStats,
    ExperimentRecord,
    run_comparison,
    simulate_end_to_end,
)
from .heuristic import PreCutPlan, run_heuristic
from .postcut import (
    PostCutPlan,
    compute_postcut_sets,
    compute_r,
    plan_postcut,
    simulate_postcut_failures,
    verify_theorem2,
)

__all__ = [
    "CodeAssignment",
    "CodingMatrix",
    "CommodityRouting",
    "ComparisonResult",
    "ConnectivityReport",
    "CutSet",
    "DeliveryStats",
    "ExactSolution",
    "ExperimentRecord",
    "FlowAssignment",
    "GeneratorConfig",
    "GraphFormatError",
    "IlpModel",
    "McgReduction",
    "NetworkGraph",
    "PostCutPlan",
    "PreCutPlan",
    "PreCutSubgraph",
    "SearchBudget",
    "assert_unique_min_cut",
    "assign_precut_vectors",
    "assignment_for",
    "build_precut_subgraph",
    "cauchy_matrix",
    "classify_node",
    "compute_postcut_sets",
    "compute_r",
    "connectivity_report",
    "decode",
    "decompose_into_paths",
    "dump_matrix",
    "ec",
    "emit_model",
    "encode",
    "esc_total",
    "generate_batch",
    "generate_instance",
    "group_flow",
    "matrix_for",
    "max_flow",
    "min_cut",
    "parse_graph",
    "parse_matrix",
    "partition_pre_post",
    "plan_postcut",
    "reduce_mcg",
    "run_comparison",
    "run_heuristic",
    "serialize_graph",
    "simulate_end_to_end",
    "simulate_postcut_failures",
    "solve_exact",
    "systematic_transform",
    "validate_assignment",
    "__version__",
]
