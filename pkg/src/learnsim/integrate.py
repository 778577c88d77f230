"""Fixed-step time integration and trace recording.

The integrator is deliberately simple: classical Runge-Kutta (or forward
Euler as a low-order cross-check) with a constant step, a shortened final
step so runs end exactly on the requested time, and clamping of components
that would undershoot zero. Fixed stepping keeps every run bit-for-bit
reproducible for a given configuration.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .models import TeachingControl

__all__ = [
    "IntegratorConfig",
    "Event",
    "Trace",
    "TraceBuilder",
    "SimulationError",
    "step",
    "advance_state",
    "integrate",
]

Dynamics = Callable[[np.ndarray, float], np.ndarray]

# Tolerance for "lands exactly on the segment end" step arithmetic,
# relative to the step size.
_REL_EPS = 1e-9


class SimulationError(RuntimeError):
    """Raised when the dynamics produce non-finite rates."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    method: str = "rk4"
    record_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"step size must be > 0, got {self.dt}")
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"method must be 'rk4' or 'euler', got {self.method!r}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")


@dataclass
class Event:
    t: float
    kind: str
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, **self.data}


@dataclass
class Trace:
    """Recorded time series of one run.

    ``z`` has one row per sample; totals and firmness are recomputed from
    it rather than stored. ``metadata['model']`` selects which firmness
    coefficient applies (``pf`` for the four-compartment model, the
    weighted ``pr`` otherwise).
    """

    t: np.ndarray
    u: np.ndarray
    teaching: np.ndarray
    z: np.ndarray
    events: list[Event]
    metadata: dict

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n_components(self) -> int:
        return self.z.shape[1]

    @property
    def strength_kind(self) -> str:
        return "pf" if self.metadata.get("model") == "four" else "pr"

    def z_total(self) -> np.ndarray:
        return self.z.sum(axis=1)

    def strength(self) -> np.ndarray:
        from .models import strength_pf, strength_pr

        fn = strength_pf if self.strength_kind == "pf" else strength_pr
        return np.array([fn(row) for row in self.z], dtype=np.float64)


class TraceBuilder:
    """Accumulates samples and events, possibly across many segments."""

    def __init__(self, record_every: int = 1):
        self.record_every = record_every
        self._t: list[float] = []
        self._u: list[float] = []
        self._teaching: list[int] = []
        self._z: list[np.ndarray] = []
        self.events: list[Event] = []
        self.steps = 0
        self.clamp_events = 0

    @property
    def last_t(self) -> float | None:
        return self._t[-1] if self._t else None

    def sample(self, t: float, ctrl: TeachingControl, z: np.ndarray) -> None:
        if self._t:
            if t == self._t[-1]:
                return
            if t < self._t[-1]:
                raise ValueError(f"sample times must increase: {t} after {self._t[-1]}")
        self._t.append(float(t))
        self._u.append(ctrl.u)
        self._teaching.append(ctrl.teaching)
        self._z.append(np.array(z, dtype=np.float64, copy=True))

    def step_sample(self, t: float, ctrl: TeachingControl, z: np.ndarray) -> None:
        """Record an accepted step, thinned by ``record_every``."""
        self.steps += 1
        if self.steps % self.record_every == 0:
            self.sample(t, ctrl, z)

    def event(self, t: float, kind: str, **data) -> None:
        self.events.append(Event(float(t), kind, data))

    def build(self, metadata: dict) -> Trace:
        meta = dict(metadata)
        meta.setdefault("clamp_events", 0)
        meta["clamp_events"] += self.clamp_events
        return Trace(
            t=np.asarray(self._t, dtype=np.float64),
            u=np.asarray(self._u, dtype=np.float64),
            teaching=np.asarray(self._teaching, dtype=np.int8),
            z=np.vstack(self._z) if self._z else np.empty((0, 0)),
            events=self.events,
            metadata=meta,
        )


def step(
    state: np.ndarray,
    dynamics: Dynamics,
    t: float,
    cfg: IntegratorConfig,
    dt: float | None = None,
) -> tuple[np.ndarray, int]:
    """One integrator step of size ``dt`` (default ``cfg.dt``).

    Returns the new state and the number of components clamped at zero.
    Non-finite dynamics abort the run with the offending time and state.
    """
    h = cfg.dt if dt is None else dt
    z = np.asarray(state, dtype=np.float64)
    if cfg.method == "euler":
        out = z + h * dynamics(z, t)
    else:
        k1 = dynamics(z, t)
        k2 = dynamics(z + 0.5 * h * k1, t + 0.5 * h)
        k3 = dynamics(z + 0.5 * h * k2, t + 0.5 * h)
        k4 = dynamics(z + h * k3, t + h)
        out = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # A single summed check catches inf and nan (inf-inf sums to nan).
    if not math.isfinite(float(out.sum())):
        raise SimulationError(
            f"non-finite rates at t={t!r} from state {z.tolist()!r}"
        )
    clamped = 0
    if float(out.min()) < 0.0:
        clamped = int(np.count_nonzero(out < 0.0))
        out = np.maximum(out, 0.0)
    return out, clamped


def advance_state(
    state: np.ndarray,
    dynamics: Dynamics,
    t0: float,
    t1: float,
    cfg: IntegratorConfig,
    on_step: Callable[[float, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, int]:
    """March ``state`` from t0 to t1; the final step is shortened to land
    exactly on t1. Returns the final state and total clamp count."""
    span = t1 - t0
    if span < 0:
        raise ValueError(f"cannot integrate backwards: t0={t0}, t1={t1}")
    n_full = int(math.floor(span / cfg.dt + _REL_EPS))
    rem = span - n_full * cfg.dt
    if rem <= cfg.dt * _REL_EPS:
        rem = 0.0
    z = np.asarray(state, dtype=np.float64)
    clamps = 0
    for i in range(n_full):
        t = t0 + i * cfg.dt
        z, c = step(z, dynamics, t, cfg)
        clamps += c
        t_new = t1 if (i == n_full - 1 and rem == 0.0) else t0 + (i + 1) * cfg.dt
        if on_step is not None:
            on_step(t_new, z)
    if rem > 0.0:
        z, c = step(z, dynamics, t0 + n_full * cfg.dt, cfg, dt=rem)
        clamps += c
        if on_step is not None:
            on_step(t1, z)
    return z, clamps


def integrate(
    state0: np.ndarray,
    dynamics: Dynamics,
    t0: float,
    t1: float,
    cfg: IntegratorConfig,
    control_at: Callable[[float], TeachingControl] | TeachingControl | None = None,
    metadata: dict | None = None,
) -> Trace:
    """Integrate over [t0, t1] and return the recorded trace.

    ``control_at`` only labels samples (a schedule lookup or a constant);
    it does not alter the dynamics, which are baked into ``dynamics``.
    """
    if t1 <= t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    if control_at is None:
        control_at = TeachingControl()
    if isinstance(control_at, TeachingControl):
        const = control_at
        control_at = lambda t: const  # noqa: E731

    builder = TraceBuilder(record_every=cfg.record_every)
    z0 = np.asarray(state0, dtype=np.float64)
    builder.sample(t0, control_at(t0), z0)
    final, clamps = advance_state(
        z0,
        dynamics,
        t0,
        t1,
        cfg,
        on_step=lambda t, z: builder.step_sample(t, control_at(t), z),
    )
    builder.clamp_events += clamps
    builder.sample(t1, control_at(t1), final)
    meta = {
        "dt": cfg.dt,
        "method": cfg.method,
        "record_every": cfg.record_every,
    }
    if metadata:
        meta.update(metadata)
    return builder.build(meta)
