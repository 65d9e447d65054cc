"""Intermediate-performance toolkit for rateless (fountain) codes."""

__version__ = "0.1.0"

from .degree_dist import (
    DegreeDistribution,
    TruncatedSolitonDesign,
    UnknownRegionError,
    ideal_soliton,
    limiting_soliton,
    max_useful_degree,
    optimal_distribution,
    perturb,
    pgf_derivative,
    pgf_eval,
    raptor_omega,
    read_distribution,
    robust_soliton,
    truncated_soliton,
    write_distribution,
)
from .asymptotics import (
    AnalysisPoint,
    check_margin_condition,
    peeling_margin,
    r_of_z,
    s_of_r,
)
from .lp_bounds import (
    BoundCurve,
    BoundRow,
    LpProblem,
    LpSolution,
    dual_outer_bound,
    dual_outer_bound_details,
    outer_bound_curve,
    primal_min_r,
    simplex_solve,
)
from .lt_codec import (
    CodedSymbol,
    DecoderState,
    decode,
    encode,
    read_symbols,
    residual_degree_histogram,
    write_symbols,
)
from .sim_harness import (
    ConvergenceRow,
    SimulationConfig,
    SimulationResult,
    SweepRow,
    convergence_report,
    run_trial,
    sweep,
    trial_seed,
    write_result_csv,
)

__all__ = [
    "__version__",
    "DegreeDistribution",
    "TruncatedSolitonDesign",
    "UnknownRegionError",
    "ideal_soliton",
    "limiting_soliton",
    "max_useful_degree",
    "optimal_distribution",
    "perturb",
    "pgf_derivative",
    "pgf_eval",
    "raptor_omega",
    "read_distribution",
    "robust_soliton",
    "truncated_soliton",
    "write_distribution",
    "AnalysisPoint",
    "check_margin_condition",
    "peeling_margin",
    "r_of_z",
    "s_of_r",
    "BoundCurve",
    "BoundRow",
    "LpProblem",
    "LpSolution",
    "dual_outer_bound",
    "dual_outer_bound_details",
    "outer_bound_curve",
    "primal_min_r",
    "simplex_solve",
    "CodedSymbol",
    "DecoderState",
    "decode",
    "encode",
    "read_symbols",
    "residual_degree_histogram",
    "write_symbols",
    "ConvergenceRow",
    "SimulationConfig",
    "SimulationResult",
    "SweepRow",
    "convergence_report",
    "run_trial",
    "sweep",
    "trial_seed",
    "write_result_csv",
]
