"""Run configuration: strict JSON parsing, serialization, and dispatch.

A run is described by one JSON document. Parsing is strict: unknown keys
anywhere are rejected, every complaint carries the field path, and all
errors for a document are collected before raising so a config can be
fixed in one pass.
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .integrate import IntegratorConfig, Trace
from .models import ModelParams
from .scenarios import (
    MODEL_KINDS,
    RequirementSchedule,
    RequirementSegment,
    SchoolCareerConfig,
    TaskSet,
    model_dimension,
    run_lessons,
    run_school_career,
    run_task_sequence,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "load_config",
    "builtin_config_names",
    "load_builtin_config",
    "run_config",
]

SCENARIOS = ("lessons", "task_sequence", "school_career")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Validation failure; ``errors`` lists one field-path-tagged message
    per problem."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    model: str
    params: ModelParams
    state0: tuple[float, ...]
    integrator: IntegratorConfig
    seed: int = 0
    unit: str = "time"
    schedule: RequirementSchedule | None = None
    tasks: TaskSet | None = None
    career: SchoolCareerConfig | None = None
    output_name: str | None = None
    output_format: str = "csv"

    def to_doc(self) -> dict:
        """Canonical JSON-ready document; parse_config(to_doc()) == self."""
        doc = {
            "scenario": self.scenario,
            "model": self.model,
            "params": {
                "alphas": list(self.params.alphas),
                "gammas": list(self.params.gammas),
                "b": self.params.b,
                "lambda": self.params.lam,
                "s": self.params.s,
            },
            "state0": list(self.state0),
            "integrator": {
                "dt": self.integrator.dt,
                "method": self.integrator.method,
                "record_every": self.integrator.record_every,
            },
            "seed": self.seed,
            "unit": self.unit,
        }
        if self.model == "general":
            doc["n"] = self.params.n
        if self.schedule is not None:
            doc["schedule"] = {
                "segments": [
                    {
                        "t_start": s.t_start,
                        "t_end": s.t_end,
                        "teaching": s.teaching,
                        "u_base": s.u_base,
                        "u_slope": s.u_slope,
                        "label": s.label,
                    }
                    for s in self.schedule.segments
                ]
            }
        if self.tasks is not None:
            doc["tasks"] = {
                "n_tasks": self.tasks.n_tasks,
                "d_theta": self.tasks.d_theta,
                "attempt_dt": self.tasks.attempt_dt,
                "lesson_len": self.tasks.lesson_len,
                "break_len": self.tasks.break_len,
                "n_lessons": self.tasks.n_lessons,
            }
        if self.career is not None:
            doc["career"] = {
                "n_grades": self.career.n_grades,
                "months_study": self.career.months_study,
                "months_vacation": self.career.months_vacation,
                "grade_requirements": list(self.career.grade_requirements),
                "post_school_horizon": self.career.post_school_horizon,
            }
        output = {}
        if self.output_name is not None:
            output["name"] = self.output_name
        if self.output_format != "csv":
            output["format"] = self.output_format
        if output:
            doc["output"] = output
        return doc


class _Checker:
    """Walks a document level, enforcing known keys and simple types."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def require_mapping(self, value, path: str, allowed: set[str]) -> dict | None:
        if not isinstance(value, dict):
            self.fail(path, f"expected an object, got {type(value).__name__}")
            return None
        for key in value:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else key, "unknown key")
        return value

    def number(self, doc: dict, path: str, key: str, default=None):
        if key not in doc:
            return default
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{path}{key}", f"expected a number, got {type(v).__name__}")
            return default
        return float(v)

    def integer(self, doc: dict, path: str, key: str, default=None):
        if key not in doc:
            return default
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"{path}{key}", f"expected an integer, got {type(v).__name__}")
            return default
        return v

    def string(self, doc: dict, path: str, key: str, default=None, choices=None):
        if key not in doc:
            return default
        v = doc[key]
        if not isinstance(v, str):
            self.fail(f"{path}{key}", f"expected a string, got {type(v).__name__}")
            return default
        if choices is not None and v not in choices:
            self.fail(f"{path}{key}", f"expected one of {list(choices)}, got {v!r}")
            return default
        return v

    def number_list(self, doc: dict, path: str, key: str, default=None):
        if key not in doc:
            return default
        v = doc[key]
        if not isinstance(v, list) or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
        ):
            self.fail(f"{path}{key}", "expected a list of numbers")
            return default
        return [float(x) for x in v]


def parse_config(doc: dict) -> RunConfig:
    """Validate a configuration document into a RunConfig.

    Raises ConfigError listing every problem found (unknown keys, type
    errors, dimension mismatches, broken invariants).
    """
    c = _Checker()
    top = c.require_mapping(
        doc,
        "",
        {
            "scenario", "model", "n", "params", "state0", "schedule",
            "tasks", "career", "integrator", "seed", "unit", "output",
        },
    )
    if top is None:
        raise ConfigError(c.errors)

    scenario = c.string(doc, "", "scenario", choices=SCENARIOS)
    if "scenario" not in doc:
        c.fail("scenario", "required")
    model = c.string(doc, "", "model", choices=MODEL_KINDS)
    if "model" not in doc:
        c.fail("model", "required")
    n_general = c.integer(doc, "", "n")
    seed = c.integer(doc, "", "seed", default=0)
    unit = c.string(doc, "", "unit", default="time")

    params = None
    if "params" not in doc:
        c.fail("params", "required")
    else:
        pdoc = c.require_mapping(doc["params"], "params", {"alphas", "gammas", "b", "lambda", "s"})
        if pdoc is not None:
            alphas = c.number_list(pdoc, "params.", "alphas")
            gammas = c.number_list(pdoc, "params.", "gammas")
            if alphas is None and "alphas" not in pdoc:
                c.fail("params.alphas", "required")
            if gammas is None and "gammas" not in pdoc:
                c.fail("params.gammas", "required")
            if alphas is not None and gammas is not None:
                try:
                    params = ModelParams(
                        alphas=tuple(alphas),
                        gammas=tuple(gammas),
                        b=c.number(pdoc, "params.", "b", default=0.0),
                        lam=c.number(pdoc, "params.", "lambda", default=1.0),
                        s=c.number(pdoc, "params.", "s", default=0.0),
                    )
                except ValueError as exc:
                    c.fail("params", str(exc))

    # Model dimensionality against params.
    dim = None
    if model is not None and params is not None:
        if model == "general":
            if n_general is None:
                c.fail("n", "required for model 'general'")
            elif n_general < 2:
                c.fail("n", f"must be >= 2, got {n_general}")
            elif params.n != n_general:
                c.fail(
                    "params",
                    f"length {params.n} does not match n={n_general} for model 'general'",
                )
            else:
                dim = n_general
        else:
            try:
                dim = model_dimension(model, params)
            except ValueError as exc:
                c.fail("params", str(exc))
        if n_general is not None and model in ("two", "three", "four"):
            if n_general != {"two": 2, "three": 3, "four": 4}[model]:
                c.fail("n", f"n={n_general} contradicts model {model!r}")

    state0 = c.number_list(doc, "", "state0")
    if state0 is not None:
        if dim is not None and len(state0) != dim:
            c.fail("state0", f"length {len(state0)} does not match model dimension {dim}")
        if any(x < 0 for x in state0):
            c.fail("state0", "components must be >= 0")
    elif dim is not None:
        state0 = [0.0] * dim

    integ = IntegratorConfig(dt=0.01, record_every=10)
    if "integrator" in doc:
        idoc = c.require_mapping(doc["integrator"], "integrator", {"dt", "method", "record_every"})
        if idoc is not None:
            try:
                integ = IntegratorConfig(
                    dt=c.number(idoc, "integrator.", "dt", default=0.01),
                    method=c.string(idoc, "integrator.", "method", default="rk4"),
                    record_every=c.integer(idoc, "integrator.", "record_every", default=10),
                )
            except ValueError as exc:
                c.fail("integrator", str(exc))

    schedule = tasks = career = None
    payload_for = {"lessons": "schedule", "task_sequence": "tasks", "school_career": "career"}
    if scenario is not None:
        wanted = payload_for[scenario]
        for key in ("schedule", "tasks", "career"):
            if key in doc and key != wanted:
                c.fail(key, f"only valid for scenario {_scenario_of(key)!r}, this run is {scenario!r}")
        if wanted not in doc:
            c.fail(wanted, f"required for scenario {scenario!r}")

    if "schedule" in doc and (scenario is None or scenario == "lessons"):
        sdoc = c.require_mapping(doc["schedule"], "schedule", {"segments"})
        if sdoc is not None:
            segs_doc = sdoc.get("segments")
            if not isinstance(segs_doc, list) or not segs_doc:
                c.fail("schedule.segments", "expected a non-empty list of segments")
            else:
                segments = []
                for i, seg in enumerate(segs_doc):
                    path = f"schedule.segments[{i}]"
                    m = c.require_mapping(
                        seg, path, {"t_start", "t_end", "teaching", "u_base", "u_slope", "label"}
                    )
                    if m is None:
                        continue
                    try:
                        segments.append(
                            RequirementSegment(
                                t_start=c.number(m, path + ".", "t_start", default=0.0),
                                t_end=c.number(m, path + ".", "t_end", default=0.0),
                                teaching=c.integer(m, path + ".", "teaching", default=0),
                                u_base=c.number(m, path + ".", "u_base", default=0.0),
                                u_slope=c.number(m, path + ".", "u_slope", default=0.0),
                                label=c.string(m, path + ".", "label", default=""),
                            )
                        )
                    except ValueError as exc:
                        c.fail(path, str(exc))
                if segments and len(segments) == len(segs_doc):
                    try:
                        schedule = RequirementSchedule(tuple(segments))
                    except ValueError as exc:
                        c.fail("schedule", str(exc))

    if "tasks" in doc and (scenario is None or scenario == "task_sequence"):
        tdoc = c.require_mapping(
            doc["tasks"],
            "tasks",
            {"n_tasks", "d_theta", "attempt_dt", "lesson_len", "break_len", "n_lessons"},
        )
        if tdoc is not None:
            try:
                tasks = TaskSet(
                    n_tasks=c.integer(tdoc, "tasks.", "n_tasks", default=1),
                    d_theta=c.number(tdoc, "tasks.", "d_theta", default=1.0),
                    attempt_dt=c.number(tdoc, "tasks.", "attempt_dt", default=1.0),
                    lesson_len=c.number(tdoc, "tasks.", "lesson_len", default=1.0),
                    break_len=c.number(tdoc, "tasks.", "break_len", default=1.0),
                    n_lessons=c.integer(tdoc, "tasks.", "n_lessons", default=1),
                )
            except ValueError as exc:
                c.fail("tasks", str(exc))

    if "career" in doc and (scenario is None or scenario == "school_career"):
        kdoc = c.require_mapping(
            doc["career"],
            "career",
            {"n_grades", "months_study", "months_vacation", "grade_requirements",
             "post_school_horizon"},
        )
        if kdoc is not None:
            reqs = c.number_list(kdoc, "career.", "grade_requirements")
            if reqs is None:
                c.fail("career.grade_requirements", "required")
            else:
                try:
                    career = SchoolCareerConfig(
                        grade_requirements=tuple(reqs),
                        n_grades=c.integer(kdoc, "career.", "n_grades", default=11),
                        months_study=c.integer(kdoc, "career.", "months_study", default=9),
                        months_vacation=c.integer(kdoc, "career.", "months_vacation", default=3),
                        post_school_horizon=c.number(
                            kdoc, "career.", "post_school_horizon", default=24.0
                        ),
                    )
                except ValueError as exc:
                    c.fail("career", str(exc))

    if scenario == "school_career" and dim is not None and dim != 3:
        c.fail("model", f"school_career runs the 3-component model, got dimension {dim}")

    output_name = None
    output_format = "csv"
    if "output" in doc:
        odoc = c.require_mapping(doc["output"], "output", {"name", "format"})
        if odoc is not None:
            output_name = c.string(odoc, "output.", "name")
            output_format = c.string(odoc, "output.", "format", default="csv", choices=FORMATS)

    if c.errors:
        raise ConfigError(c.errors)

    return RunConfig(
        scenario=scenario,
        model=model,
        params=params,
        state0=tuple(state0),
        integrator=integ,
        seed=seed,
        unit=unit,
        schedule=schedule,
        tasks=tasks,
        career=career,
        output_name=output_name,
        output_format=output_format,
    )


def _scenario_of(payload_key: str) -> str:
    return {"schedule": "lessons", "tasks": "task_sequence", "career": "school_career"}[payload_key]


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"(document): not valid JSON: {exc}"]) from exc
    return parse_config(doc)


def builtin_config_names() -> list[str]:
    root = resources.files("learnsim") / "configs"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_builtin_config(name: str) -> RunConfig:
    path = resources.files("learnsim") / "configs" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(
            [f"(document): no builtin config {name!r}; available: {builtin_config_names()}"]
        )
    return parse_config(json.loads(path.read_text()))


def run_config(cfg: RunConfig) -> Trace:
    """Dispatch a parsed configuration to its scenario runner."""
    state0 = np.asarray(cfg.state0, dtype=np.float64)
    if cfg.scenario == "lessons":
        return run_lessons(
            cfg.schedule, cfg.model, cfg.params, state0, cfg.integrator,
            unit=cfg.unit, seed=cfg.seed,
        )
    if cfg.scenario == "task_sequence":
        return run_task_sequence(
            cfg.tasks, cfg.params, state0, cfg.integrator, cfg.seed,
            kind=cfg.model, unit=cfg.unit,
        )
    if cfg.scenario == "school_career":
        return run_school_career(
            cfg.career, cfg.params, state0, cfg.integrator,
            kind=cfg.model, unit=cfg.unit, seed=cfg.seed,
        )
    raise ValueError(f"unknown scenario {cfg.scenario!r}")
