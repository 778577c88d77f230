"""Multi-compartment simulation of learning and forgetting.

Batch scenarios (lessons, a task-difficulty staircase, a full school
career), deterministic trace export with reports and figures, and a live
session service where a human steers the requirement level of a simulated
class in real time.
"""

from .config import (
    ConfigError,
    RunConfig,
    builtin_config_names,
    load_builtin_config,
    load_config,
    parse_config,
    run_config,
)
from .integrate import (
    Event,
    IntegratorConfig,
    SimulationError,
    Trace,
    advance_state,
    integrate,
    step,
)
from .models import (
    ModelParams,
    TeachingControl,
    derivatives_four,
    derivatives_general,
    derivatives_two,
    gamma_from_tau,
    strength_pf,
    strength_pr,
    total_knowledge,
)
from .rasch import AttemptRecord, attempt, solve_probability
from .report import count_dips, fit_decay_rates, read_trace, render_figures, summarize, write_trace
from .scenarios import (
    RequirementSchedule,
    RequirementSegment,
    SchoolCareerConfig,
    TaskSet,
    requirement_at,
    run_lessons,
    run_school_career,
    run_task_sequence,
)
from .version import __version__

__all__ = [
    "__version__",
    "AttemptRecord",
    "ConfigError",
    "Event",
    "IntegratorConfig",
    "ModelParams",
    "RequirementSchedule",
    "RequirementSegment",
    "RunConfig",
    "SchoolCareerConfig",
    "SimulationError",
    "TaskSet",
    "TeachingControl",
    "Trace",
    "advance_state",
    "attempt",
    "builtin_config_names",
    "count_dips",
    "derivatives_four",
    "derivatives_general",
    "derivatives_two",
    "fit_decay_rates",
    "gamma_from_tau",
    "integrate",
    "load_builtin_config",
    "load_config",
    "parse_config",
    "read_trace",
    "render_figures",
    "requirement_at",
    "run_config",
    "run_lessons",
    "run_school_career",
    "run_task_sequence",
    "solve_probability",
    "step",
    "strength_pf",
    "strength_pr",
    "summarize",
    "total_knowledge",
    "write_trace",
]
