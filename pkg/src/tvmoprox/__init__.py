"""On-line multi-objective proximal gradient descent with tradeoff regret checks."""

from .engine import EngineConfig, InnerRecord, Trajectory, inner_step, run_online, run_time_step
from .errors import (
    ConfigError,
    ConstructionError,
    ContractViolation,
    ConvergenceFailure,
    DomainError,
    ScenarioParseError,
    UnsupportedScenario,
)
from .objective_model import (
    INF,
    Box,
    CompositeObjective,
    L1Norm,
    ObjectiveStream,
    ProxTerm,
    Quadratic,
    SmoothTerm,
    Zero,
    builtin_prox_terms,
    make_quadratic,
    prox_grad_map,
    subdiff_distance,
)
from .oracles import (
    OptimumTrace,
    finite_diff_gradient,
    grid_pareto_front,
    optimum_trace,
    pareto_dominates,
    solve_offline,
    solve_scalarized,
    static_optimum,
)
from .scenarios import emit_report, load_scenario, parse_scenario, run_experiment

__version__ = "0.1.0"
