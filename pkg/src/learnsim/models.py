"""Compartment models of learning and forgetting.

Knowledge is split into n categories of increasing firmness: component 1
holds the weakest knowledge (fastest forgetting), component n the firmest.
While a lesson is running, new knowledge enters component 1 at a rate
proportional to the deficit between the requirement level U and the total
knowledge Z, and already-acquired knowledge migrates toward firmer
components. Outside lessons every component decays exponentially at its
own forgetting rate.

All states are plain numpy vectors of non-negative floats; the functions
here are pure and evaluate rate vectors for the fixed-step integrator.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ModelParams",
    "TeachingControl",
    "derivatives_two",
    "derivatives_four",
    "derivatives_general",
    "total_knowledge",
    "strength_pf",
    "strength_pr",
    "gamma_from_tau",
]


@dataclass(frozen=True)
class ModelParams:
    """Rate coefficients shared by all model variants.

    alphas : per-component assimilation rates (1/time). ``alphas[0]``
        feeds component 1 from the requirement deficit; ``alphas[i]``
        (i >= 1) moves knowledge from component i into component i+1.
    gammas : per-component forgetting rates (1/time), strictly decreasing
        so firmer knowledge decays slower.
    b      : exponent on total knowledge Z in the acquisition term;
        b = 0 when per-lesson gains are small against the total.
    lam    : discrimination of the logistic task-solving probability.
    s      : material-complexity coefficient in [0, 1]; teaching-driven
        terms of the generalized model are scaled by (1 - s).
    """

    alphas: tuple[float, ...]
    gammas: tuple[float, ...]
    b: float = 0.0
    lam: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "s", float(self.s))
        if len(self.alphas) < 2:
            raise ValueError(f"need at least 2 components, got {len(self.alphas)}")
        if len(self.alphas) != len(self.gammas):
            raise ValueError(
                f"alphas length {len(self.alphas)} != gammas length {len(self.gammas)}"
            )
        if any(a < 0 for a in self.alphas):
            raise ValueError(f"assimilation rates must be >= 0, got {self.alphas}")
        if any(g < 0 for g in self.gammas):
            raise ValueError(f"forgetting rates must be >= 0, got {self.gammas}")
        if any(hi <= lo for hi, lo in zip(self.gammas, self.gammas[1:])):
            raise ValueError(
                "forgetting rates must be strictly decreasing "
                f"(weak knowledge forgets fastest), got {self.gammas}"
            )
        if self.b < 0:
            raise ValueError(f"exponent b must be >= 0, got {self.b}")
        if self.lam <= 0:
            raise ValueError(f"discrimination lam must be > 0, got {self.lam}")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"complexity s must be in [0, 1], got {self.s}")

    @property
    def n(self) -> int:
        return len(self.alphas)

    @cached_property
    def alphas_arr(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=np.float64)

    @cached_property
    def gammas_arr(self) -> np.ndarray:
        return np.asarray(self.gammas, dtype=np.float64)


@dataclass(frozen=True)
class TeachingControl:
    """Teacher's control signal: lesson on/off and the requirement level."""

    teaching: int = 0
    u: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "teaching", int(self.teaching))
        object.__setattr__(self, "u", float(self.u))
        if self.teaching not in (0, 1):
            raise ValueError(f"teaching flag must be 0 or 1, got {self.teaching}")
        if self.u < 0:
            raise ValueError(f"requirement level must be >= 0, got {self.u}")


def _check_dim(state: np.ndarray, params: ModelParams, n: int | None = None) -> None:
    want = params.n if n is None else n
    if len(state) != want:
        raise ValueError(f"state length {len(state)} does not match model dimension {want}")
    if n is not None and params.n != n:
        raise ValueError(f"params dimension {params.n} does not match model dimension {n}")


def _z_power(total: float, b: float) -> float:
    # Z**b with the convention Z**0 == 1 even at Z == 0.
    if b == 0.0:
        return 1.0
    return total**b


def derivatives_two(state: np.ndarray, params: ModelParams, ctrl: TeachingControl) -> np.ndarray:
    """Rate vector of the two-compartment model.

    dZ1/dt = k*a1*(U - Z) - k*a2*Z1 - g1*Z1
    dZ2/dt = k*a2*Z1 - g2*Z2

    The acquisition term carries no Z**b factor in this variant.
    """
    _check_dim(state, params, 2)
    k = ctrl.teaching
    a1, a2 = params.alphas
    g1, g2 = params.gammas
    z1, z2 = float(state[0]), float(state[1])
    total = z1 + z2
    dz1 = k * a1 * (ctrl.u - total) - k * a2 * z1 - g1 * z1
    dz2 = k * a2 * z1 - g2 * z2
    return np.array([dz1, dz2], dtype=np.float64)


def derivatives_four(state: np.ndarray, params: ModelParams, ctrl: TeachingControl) -> np.ndarray:
    """Rate vector of the four-compartment model.

    dZ1/dt = k*a1*(U - Z)*Z**b - k*a2*Z1 - g1*Z1
    dZ2/dt = k*a2*Z1 - k*a3*Z2 - g2*Z2
    dZ3/dt = k*a3*Z2 - k*a4*Z3 - g3*Z3
    dZ4/dt = k*a4*Z3 - g4*Z4
    """
    _check_dim(state, params, 4)
    k = ctrl.teaching
    a1, a2, a3, a4 = params.alphas
    g1, g2, g3, g4 = params.gammas
    z1, z2, z3, z4 = (float(v) for v in state)
    total = z1 + z2 + z3 + z4
    zb = _z_power(total, params.b)
    dz1 = k * a1 * (ctrl.u - total) * zb - k * a2 * z1 - g1 * z1
    dz2 = k * a2 * z1 - k * a3 * z2 - g2 * z2
    dz3 = k * a3 * z2 - k * a4 * z3 - g3 * z3
    dz4 = k * a4 * z3 - g4 * z4
    return np.array([dz1, dz2, dz3, dz4], dtype=np.float64)


def derivatives_general(
    state: np.ndarray, params: ModelParams, ctrl: TeachingControl
) -> np.ndarray:
    """Rate vector of the n-compartment model with complexity scaling.

    dZ1/dt = r*(1-s)*(a1*(U - Z)*Z**b - a2*Z1) - g1*Z1
    dZi/dt = r*(1-s)*(ai*Z[i-1] - a[i+1]*Zi) - gi*Zi      (1 < i < n)
    dZn/dt = r*(1-s)*an*Z[n-1] - gn*Zn

    With the teaching flag r = 0 every component reduces to pure
    exponential forgetting -gi*Zi; with n = 4 and s = 0 the rates equal
    the four-compartment model exactly.
    """
    _check_dim(state, params)
    n = params.n
    a = params.alphas
    g = params.gammas
    z = state.tolist() if isinstance(state, np.ndarray) else [float(v) for v in state]
    total = sum(z)
    gain = ctrl.teaching * (1.0 - params.s)
    rates = [0.0] * n
    rates[0] = gain * (a[0] * (ctrl.u - total) * _z_power(total, params.b) - a[1] * z[0]) - g[0] * z[0]
    for i in range(1, n - 1):
        rates[i] = gain * (a[i] * z[i - 1] - a[i + 1] * z[i]) - g[i] * z[i]
    rates[n - 1] = gain * a[n - 1] * z[n - 2] - g[n - 1] * z[n - 1]
    return np.array(rates, dtype=np.float64)


def total_knowledge(state: np.ndarray) -> float:
    """Total knowledge Z: the sum over all components."""
    return float(np.sum(state))


def strength_pf(state: np.ndarray) -> float:
    """Firmness fraction of a 4-component state: Z4 / Z, 0 on empty states."""
    if len(state) != 4:
        raise ValueError(f"firmness fraction Pf is defined for 4 components, got {len(state)}")
    total = float(np.sum(state))
    if total == 0.0:
        return 0.0
    return float(state[3]) / total


def strength_pr(state: np.ndarray) -> float:
    """Weighted firmness of an n-component state.

    Component i (1-indexed) carries weight 1/2**(n-i) for i >= 2 and
    weight 0 for the weakest component:

        Pr = (Z2/2**(n-2) + ... + Z[n-1]/2 + Zn) / Z

    Returns 0 on empty states.
    """
    n = len(state)
    if n < 2:
        raise ValueError(f"weighted firmness needs >= 2 components, got {n}")
    total = float(np.sum(state))
    if total == 0.0:
        return 0.0
    weights = np.zeros(n, dtype=np.float64)
    weights[1:] = 2.0 ** (np.arange(1, n) + 1.0 - n)
    return float(np.dot(weights, np.asarray(state, dtype=np.float64))) / total


def gamma_from_tau(tau: float) -> float:
    """Forgetting rate from the e-folding time: gamma = 1/tau."""
    if tau <= 0:
        raise ValueError(f"e-folding time must be > 0, got {tau}")
    return 1.0 / float(tau)
