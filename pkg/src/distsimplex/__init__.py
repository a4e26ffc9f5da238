"""Distributed Simplex Architecture: per-agent runtime assurance for multi-agent systems."""
from .baseline import BcObjective, LpSolution, build_objective, solve_bc
from .cbf import (
    AdmissibleSet,
    HalfPlane,
    LieDecomposition,
    PairwiseCbf,
    admissible_set,
    eval_h,
    lie_decomposition,
    pairwise_constraint,
    partition,
)
from .controllers import ReynoldsWeights, WaypointPlan, reynolds_action, waypoint_action
from .decision import DmState, Mode, SwitchParams, dm_step, fsc, rsc, threshold_lambda
from .dynamics import AgentState, MasState, PhysicalLimits, neighbors, step_dynamics
from .harness import RunSummary, Simulation, StepRecord, mean_bc_fraction, run
from .kernels import BACKEND
from .scenario import Scenario, ScenarioError, builtin, load

__version__ = "0.1.0"
