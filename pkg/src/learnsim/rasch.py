"""Task-solving probability and seeded Bernoulli attempts.

A student with total knowledge Z facing a task of difficulty theta solves
it with logistic probability p = 1/(1 + exp(-lam*(Z - theta))): exactly
0.5 at Z == theta, saturating toward 0/1 as the gap grows. ``lam`` is the
discrimination of this one-parameter item-response curve.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["AttemptRecord", "solve_probability", "attempt"]


@dataclass(frozen=True)
class AttemptRecord:
    t: float
    task_index: int
    theta: float
    z_at_attempt: float
    probability: float
    outcome: str  # "solved" | "failed"

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "task": self.task_index,
            "theta": self.theta,
            "z": self.z_at_attempt,
            "p": self.probability,
            "outcome": self.outcome,
        }


def solve_probability(z: float, theta: float, lam: float) -> float:
    """Logistic solving probability, overflow-safe for any finite inputs."""
    if lam <= 0:
        raise ValueError(f"discrimination must be > 0, got {lam}")
    x = lam * (float(z) - float(theta))
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def attempt(
    z: float,
    theta: float,
    lam: float,
    rng: np.random.Generator,
    t: float = 0.0,
    task_index: int = 0,
) -> AttemptRecord:
    """Draw one attempt outcome: solved iff a uniform draw falls below p."""
    p = solve_probability(z, theta, lam)
    solved = float(rng.random()) < p
    return AttemptRecord(
        t=float(t),
        task_index=int(task_index),
        theta=float(theta),
        z_at_attempt=float(z),
        probability=p,
        outcome="solved" if solved else "failed",
    )
