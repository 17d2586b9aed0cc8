"""Two-stage truck routing and crew scheduling toolkit."""

from .model import (
    ContractError,
    Driver,
    InputError,
    Instance,
    Request,
    Schedule,
    Task,
    TaskPlan,
    Truck,
    Violation,
    check_rest,
    cost_stage1,
    cost_stage2,
    shuttle_cost,
    travel_dist,
    travel_time,
    validate,
    w_inf,
    workload,
)
from .netgen import GenParams, ParseError, RoadNetwork, default_network, generate
from .stage1 import Stage1Infeasible, route_trucks, segment
from .stage2 import (
    MoveRejection,
    RunStats,
    SearchConfig,
    apply_move,
    grasp,
    greedy_construct,
    perturb,
    repair,
    run_restarts,
    semi_greedy_construct,
    vnd,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "Driver",
    "GenParams",
    "InputError",
    "Instance",
    "MoveRejection",
    "ParseError",
    "Request",
    "RoadNetwork",
    "RunStats",
    "Schedule",
    "SearchConfig",
    "Stage1Infeasible",
    "Task",
    "TaskPlan",
    "Truck",
    "Violation",
    "apply_move",
    "check_rest",
    "cost_stage1",
    "cost_stage2",
    "default_network",
    "generate",
    "grasp",
    "greedy_construct",
    "perturb",
    "repair",
    "route_trucks",
    "run_restarts",
    "segment",
    "semi_greedy_construct",
    "shuttle_cost",
    "travel_dist",
    "travel_time",
    "validate",
    "vnd",
    "w_inf",
    "workload",
]
