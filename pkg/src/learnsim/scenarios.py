"""Scenario runners: requirement schedules, the task staircase, and the
multi-year school career.

Each runner integrates one of the compartment models against a time
pattern of lessons and breaks, always splitting the integration exactly at
schedule breakpoints so no step straddles a discontinuity in U(t).
"""

import bisect
import warnings
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, Trace, TraceBuilder, advance_state
from .models import (
    ModelParams,
    TeachingControl,
    derivatives_four,
    derivatives_general,
    derivatives_two,
)
from .rasch import attempt

__all__ = [
    "RequirementSegment",
    "RequirementSchedule",
    "TaskSet",
    "SchoolCareerConfig",
    "requirement_at",
    "run_lessons",
    "run_task_sequence",
    "run_school_career",
    "model_dimension",
]

MODEL_KINDS = ("two", "three", "four", "general")

_RHS = {
    "two": derivatives_two,
    "four": derivatives_four,
    "three": derivatives_general,
    "general": derivatives_general,
}


def model_dimension(kind: str, params: ModelParams) -> int:
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}, expected one of {MODEL_KINDS}")
    fixed = {"two": 2, "three": 3, "four": 4}.get(kind)
    if fixed is not None and params.n != fixed:
        raise ValueError(
            f"model {kind!r} needs {fixed} components, params have {params.n}"
        )
    return params.n


@dataclass(frozen=True)
class RequirementSegment:
    """One homogeneous span of the schedule: a lesson (teaching=1, with
    U(t) = u_base + u_slope*(t - t_start)) or a break (teaching=0, U=0)."""

    t_start: float
    t_end: float
    teaching: int
    u_base: float = 0.0
    u_slope: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "teaching", int(self.teaching))
        object.__setattr__(self, "u_base", float(self.u_base))
        object.__setattr__(self, "u_slope", float(self.u_slope))
        if self.t_end <= self.t_start:
            raise ValueError(f"segment must have t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.teaching not in (0, 1):
            raise ValueError(f"teaching flag must be 0 or 1, got {self.teaching}")
        if self.u_base < 0:
            raise ValueError(f"u_base must be >= 0, got {self.u_base}")
        if self.u_base + self.u_slope * (self.t_end - self.t_start) < 0:
            raise ValueError(
                f"requirement level goes negative before t_end={self.t_end} "
                f"(u_base={self.u_base}, u_slope={self.u_slope})"
            )

    def control(self, t: float) -> TeachingControl:
        if not self.teaching:
            return TeachingControl(0, 0.0)
        u = self.u_base + self.u_slope * (t - self.t_start)
        return TeachingControl(1, max(u, 0.0))


@dataclass(frozen=True)
class RequirementSchedule:
    """Contiguous, ordered segments covering one span of simulated time."""

    segments: tuple[RequirementSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if nxt.t_start != prev.t_end:
                raise ValueError(
                    f"segments must be contiguous: one ends at {prev.t_end}, "
                    f"the next starts at {nxt.t_start}"
                )

    @property
    def t0(self) -> float:
        return self.segments[0].t_start

    @property
    def t1(self) -> float:
        return self.segments[-1].t_end

    def segment_at(self, t: float) -> RequirementSegment:
        if t < self.t0 or t > self.t1:
            raise ValueError(f"t={t} outside schedule span [{self.t0}, {self.t1}]")
        if t == self.t1:
            return self.segments[-1]
        starts = [s.t_start for s in self.segments]
        return self.segments[bisect.bisect_right(starts, t) - 1]

    def control_at(self, t: float) -> TeachingControl:
        return self.segment_at(t).control(t)


def requirement_at(schedule: RequirementSchedule, t: float) -> TeachingControl:
    """Control in force at time t; segments are right-open, the final one
    closed, and breaks always report U = 0."""
    return schedule.control_at(t)


@dataclass(frozen=True)
class TaskSet:
    """Staircase of tasks with difficulty theta_i = i*d_theta, attempted
    every attempt_dt of lesson time, over alternating lessons/breaks."""

    n_tasks: int
    d_theta: float
    attempt_dt: float
    lesson_len: float
    break_len: float
    n_lessons: int

    def __post_init__(self):
        object.__setattr__(self, "n_tasks", int(self.n_tasks))
        object.__setattr__(self, "d_theta", float(self.d_theta))
        object.__setattr__(self, "attempt_dt", float(self.attempt_dt))
        object.__setattr__(self, "lesson_len", float(self.lesson_len))
        object.__setattr__(self, "break_len", float(self.break_len))
        object.__setattr__(self, "n_lessons", int(self.n_lessons))
        if self.n_tasks < 1:
            raise ValueError(f"n_tasks must be >= 1, got {self.n_tasks}")
        if self.n_lessons < 1:
            raise ValueError(f"n_lessons must be >= 1, got {self.n_lessons}")
        for name in ("d_theta", "attempt_dt", "lesson_len", "break_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.lesson_len < 10 * self.attempt_dt:
            warnings.warn(
                f"lesson_len={self.lesson_len} is not large against "
                f"attempt_dt={self.attempt_dt}; the attempt cadence will be coarse",
                stacklevel=2,
            )
        if self.break_len < 10 * self.attempt_dt:
            warnings.warn(
                f"break_len={self.break_len} is not large against "
                f"attempt_dt={self.attempt_dt}",
                stacklevel=2,
            )

    def theta(self, task_index: int) -> float:
        return task_index * self.d_theta


@dataclass(frozen=True)
class SchoolCareerConfig:
    """A full school career: per-grade requirement levels, yearly study and
    vacation months, and a post-graduation span of pure forgetting."""

    grade_requirements: tuple[float, ...]
    n_grades: int = 11
    months_study: int = 9
    months_vacation: int = 3
    post_school_horizon: float = 24.0

    def __post_init__(self):
        object.__setattr__(
            self, "grade_requirements", tuple(float(u) for u in self.grade_requirements)
        )
        object.__setattr__(self, "n_grades", int(self.n_grades))
        object.__setattr__(self, "months_study", int(self.months_study))
        object.__setattr__(self, "months_vacation", int(self.months_vacation))
        object.__setattr__(self, "post_school_horizon", float(self.post_school_horizon))
        if self.n_grades < 1:
            raise ValueError(f"n_grades must be >= 1, got {self.n_grades}")
        if self.months_study < 1 or self.months_vacation < 1:
            raise ValueError("study and vacation lengths must be >= 1 month")
        if len(self.grade_requirements) != self.n_grades:
            raise ValueError(
                f"grade_requirements length {len(self.grade_requirements)} "
                f"!= n_grades {self.n_grades}"
            )
        if any(u < 0 for u in self.grade_requirements):
            raise ValueError("grade requirements must be >= 0")
        if self.post_school_horizon < 0:
            raise ValueError(
                f"post_school_horizon must be >= 0, got {self.post_school_horizon}"
            )

    def build_schedule(self) -> RequirementSchedule:
        segments = []
        t = 0.0
        year = self.months_study + self.months_vacation
        for g in range(1, self.n_grades + 1):
            t0 = (g - 1) * year
            u_g = self.grade_requirements[g - 1]
            # A grade that demands nothing holds no lessons: knowledge only
            # decays, it is not actively pulled down toward U = 0.
            segments.append(
                RequirementSegment(
                    t0, t0 + self.months_study, 1 if u_g > 0 else 0,
                    u_base=u_g, label=f"grade {g}",
                )
            )
            segments.append(
                RequirementSegment(
                    t0 + self.months_study, g * year, 0, label=f"vacation {g}",
                )
            )
            t = g * year
        if self.post_school_horizon > 0:
            segments.append(
                RequirementSegment(t, t + self.post_school_horizon, 0, label="after graduation")
            )
        return RequirementSchedule(tuple(segments))


def _validate_state0(state0, n: int) -> np.ndarray:
    z = np.asarray(state0, dtype=np.float64)
    if z.shape != (n,):
        raise ValueError(f"initial state length {z.shape} does not match model dimension {n}")
    if np.any(z < 0):
        raise ValueError(f"initial state must be non-negative, got {z.tolist()}")
    return z.copy()


def _base_metadata(kind, params, cfg, unit, seed=None, **extra) -> dict:
    meta = {
        "model": kind,
        "params": params_dict(params),
        "dt": cfg.dt,
        "method": cfg.method,
        "record_every": cfg.record_every,
        "unit": unit,
        "rng": "pcg64",
    }
    if seed is not None:
        meta["seed"] = seed
    meta.update(extra)
    return meta


def params_dict(params: ModelParams) -> dict:
    return {
        "alphas": list(params.alphas),
        "gammas": list(params.gammas),
        "b": params.b,
        "lambda": params.lam,
        "s": params.s,
    }


def run_lessons(
    schedule: RequirementSchedule,
    kind: str,
    params: ModelParams,
    state0,
    cfg: IntegratorConfig,
    unit: str = "time",
    seed: int | None = None,
    metadata: dict | None = None,
) -> Trace:
    """Integrate a model against a requirement schedule.

    The integration restarts at every segment boundary; samples at a
    boundary carry the control of the segment that starts there.
    """
    rhs = _RHS[kind]
    n = model_dimension(kind, params)
    z = _validate_state0(state0, n)
    builder = TraceBuilder(cfg.record_every)

    for index, seg in enumerate(schedule.segments):
        start_kind = "lesson_start" if seg.teaching else "break_start"
        end_kind = "lesson_end" if seg.teaching else "break_end"
        builder.event(seg.t_start, start_kind, index=index, label=seg.label)
        builder.sample(seg.t_start, seg.control(seg.t_start), z)

        if seg.u_slope == 0.0:
            const_ctrl = seg.control(seg.t_start)

            def dynamics(zz, tt, _c=const_ctrl):
                return rhs(zz, params, _c)
        else:

            def dynamics(zz, tt, _seg=seg):
                return rhs(zz, params, _seg.control(tt))

        def on_step(tt, zz, _seg=seg):
            # The boundary sample belongs to the next segment (right-open
            # control); it is written when that segment starts.
            if tt < _seg.t_end:
                builder.step_sample(tt, _seg.control(tt), zz)
            else:
                builder.steps += 1

        z, clamps = advance_state(z, dynamics, seg.t_start, seg.t_end, cfg, on_step)
        builder.clamp_events += clamps
        builder.event(seg.t_end, end_kind, index=index, label=seg.label)

    last = schedule.segments[-1]
    builder.sample(schedule.t1, last.control(schedule.t1), z)
    meta = _base_metadata(kind, params, cfg, unit, seed=seed, scenario="lessons")
    if metadata:
        meta.update(metadata)
    return builder.build(meta)


def run_task_sequence(
    tasks: TaskSet,
    params: ModelParams,
    state0,
    cfg: IntegratorConfig,
    seed: int,
    kind: str = "two",
    unit: str = "time",
) -> Trace:
    """Teacher-loop over a staircase of tasks.

    At each attempt boundary the current task is presented and its outcome
    drawn immediately; the following attempt_dt of lesson time is then
    either a teaching interval at U = theta_i (failure) or a consolidation
    interval (success: the requirement tracks Z so no new knowledge is
    acquired while transitions keep firming what is there). The recorded
    u column is the difficulty staircase theta(t); breaks are pure decay.
    """
    rhs = _RHS[kind]
    n = model_dimension(kind, params)
    z = _validate_state0(state0, n)
    rng = np.random.default_rng(seed)
    builder = TraceBuilder(cfg.record_every)

    def teaching_dynamics(theta):
        ctrl = TeachingControl(1, theta)
        return lambda zz, tt: rhs(zz, params, ctrl)

    def consolidation_dynamics(zz, tt):
        # Requirement pinned to the current total: zero deficit, so the
        # acquisition term vanishes while inter-component transitions run.
        return rhs(zz, params, TeachingControl(1, float(np.sum(zz))))

    break_ctrl = TeachingControl(0, 0.0)
    decay_dynamics = lambda zz, tt: rhs(zz, params, break_ctrl)  # noqa: E731
    eps = 1e-9 * max(1.0, tasks.lesson_len)

    t = 0.0
    task = 1
    solved_all = False
    current_ctrl = TeachingControl(0, 0.0)

    def run_interval(state, dynamics, span, ctrl):
        nonlocal t, current_ctrl
        current_ctrl = ctrl
        builder.sample(t, ctrl, state)
        t_end = t + span

        def on_step(tt, zz):
            if tt < t_end:
                builder.step_sample(tt, ctrl, zz)
            else:
                builder.steps += 1

        state, clamps = advance_state(state, dynamics, t, t_end, cfg, on_step)
        builder.clamp_events += clamps
        t = t_end
        return state

    for lesson in range(1, tasks.n_lessons + 1):
        builder.event(t, "lesson_start", index=lesson)
        lesson_t0 = t
        while t - lesson_t0 < tasks.lesson_len - eps and not solved_all:
            theta = tasks.theta(task)
            record = attempt(float(np.sum(z)), theta, params.lam, rng, t=t, task_index=task)
            payload = record.to_dict()
            payload.pop("t")
            builder.event(t, "attempt", **payload)
            dynamics = consolidation_dynamics if record.solved else teaching_dynamics(theta)
            z = run_interval(z, dynamics, tasks.attempt_dt, TeachingControl(1, theta))
            if record.solved:
                task += 1
                solved_all = task > tasks.n_tasks
        builder.event(t, "lesson_end", index=lesson)
        if solved_all:
            break
        if lesson < tasks.n_lessons:
            builder.event(t, "break_start", index=lesson)
            z = run_interval(z, decay_dynamics, tasks.break_len, TeachingControl(0, 0.0))
            builder.event(t, "break_end", index=lesson)

    builder.sample(t, current_ctrl, z)
    meta = _base_metadata(
        kind, params, cfg, unit, seed=seed,
        scenario="task_sequence",
        tasks={
            "n_tasks": tasks.n_tasks,
            "d_theta": tasks.d_theta,
            "attempt_dt": tasks.attempt_dt,
            "lesson_len": tasks.lesson_len,
            "break_len": tasks.break_len,
            "n_lessons": tasks.n_lessons,
        },
        tasks_solved=task - 1,
    )
    return builder.build(meta)


def run_school_career(
    career: SchoolCareerConfig,
    params: ModelParams,
    state0,
    cfg: IntegratorConfig,
    kind: str = "three",
    unit: str = "months",
    seed: int | None = None,
) -> Trace:
    """Simulate the full school career with the three-compartment model:
    alternating study/vacation segments per grade, then pure forgetting."""
    if model_dimension(kind, params) != 3:
        raise ValueError(f"school career uses a 3-component model, params have {params.n}")
    schedule = career.build_schedule()
    trace = run_lessons(
        schedule, kind, params, state0, cfg, unit=unit, seed=seed,
        metadata={
            "scenario": "school_career",
            "career": {
                "n_grades": career.n_grades,
                "months_study": career.months_study,
                "months_vacation": career.months_vacation,
                "grade_requirements": list(career.grade_requirements),
                "post_school_horizon": career.post_school_horizon,
            },
        },
    )
    return trace
