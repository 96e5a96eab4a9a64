"""Provably correct surveillance strategies with minimum expected average
penalty per surveillance cycle, offline and receding-horizon."""

from .buchi import BuchiAutomaton, Guard, lasso_accepts, to_buchi
from .gridworld import case_study, generate_grid, radial_probability_map
from .harness import (
    ExperimentResult,
    ReplicationResult,
    SimulationConfig,
    paired_comparison,
    run_experiment,
    simulate_replication,
    verify_satisfaction,
)
from .ltl import LtlSyntaxError, eval_lasso, parse_ltl
from .model import (
    ModelError,
    ModelFormatError,
    ModelValidationError,
    SurveillanceSpec,
    TransitionSystem,
    count_surveillance_cycles,
    load_model,
    load_problem,
    min_weights,
    run_weight,
    save_model,
    universal_surveillance,
    visible_set,
)
from .offline import (
    ControllerConfig,
    CycleStrategy,
    EstimateCapExceeded,
    MissionStrategy,
    OfflineController,
    RoundStats,
    estimate_required_cycles,
)
from .online import (
    DistanceIndicator,
    OnlineConfig,
    OnlineController,
    enumerate_segment_runs,
    enumerate_shortening_runs,
    evaluate_run,
)
from .penalty import (
    PenaltyError,
    PenaltyField,
    PenaltyState,
    dp_expected_penalty,
    expected_penalty,
    init_penalties,
    planning_penalty,
    simulated_expected_penalty,
    step_penalties,
)
from .product import (
    AcceptingComponent,
    EmptyProductError,
    Product,
    UnsatisfiableError,
    accepting_sccs,
    build_product,
    project_run,
)
from .reduction import OptimalCycle, ReducedSystem, karp_min_mean, optimal_cycle, reduce_ascc
from .synthesis import SynthesisResult, synthesize

__version__ = "0.1.0"
