"""Simulator for the weakener gadget under atomic, strongly linearizable and
merely linearizable registers."""

from .adversary import FairScheduler, TheoremOneAdversary, fair_scheduler, theorem1_adversary
from .harness import ExperimentSpec, Summary, per_round_continuation, run_experiment
from .histories import History, check_prefix_property, is_linearizable, real_time_precedes
from .kernel import (
    DisabledDecision,
    InvalidConfig,
    RespondOp,
    RunResult,
    SimConfig,
    Simulation,
    StepProcess,
    apply,
    new_simulation,
    observe,
    run,
)
from .minimax import minimax_round_value
from .registers import BOT, BackendKind, InsertionChoice, RegisterId
from .weakener import compose, phase1_guard, phase2_guard, weakener_program

__all__ = [
    "BOT", "BackendKind", "DisabledDecision", "ExperimentSpec", "FairScheduler", "History", "InsertionChoice",
    "InvalidConfig", "RegisterId", "RespondOp", "RunResult", "SimConfig", "Simulation",
    "StepProcess", "TheoremOneAdversary", "apply", "check_prefix_property", "compose",
    "fair_scheduler", "is_linearizable", "minimax_round_value", "new_simulation", "observe",
    "per_round_continuation", "phase1_guard", "phase2_guard", "real_time_precedes", "run",
    "run_experiment", "Summary", "theorem1_adversary",
    "weakener_program",
]
