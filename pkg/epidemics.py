#!/usr/bin/env python3
"""
epidemics.py

SEIR / SAIR / SEAIR compartmental models driven by a switched contact rate
beta in {beta_lock, beta_free}, and their reduction to the constrained-gain
framework of synthesis.py through the effective gain gamma(t) = beta(t) S(t).

- derivatives        : exact right-hand sides (components sum to zero)
- reduced_plant      : (F, g, H) of the infected sub-system
- condition_threshold / condition_status : when sliding control can work
- lockdown_law       : state-only switching rule, lockdown <=> expression > 0
- simulate_epidemic  : closed-loop run with the condition-status timeline
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

import linalg
import sim
from global_analysis import GlobalParams
from linalg import Poly
from synthesis import Interval, Plant

logger = logging.getLogger(__name__)

# -------------------------
# Configuration
# -------------------------
SIMPLEX_TOL = 1e-9


class ConditionStatus(str, Enum):
    FEASIBLE = "FEASIBLE"
    LOCK_TOO_WEAK = "LOCK_TOO_WEAK"
    EPIDEMIC_DIES = "EPIDEMIC_DIES"


def _check_rates(kind: str, **rates):
    bad = {k: v for k, v in rates.items() if not (np.isfinite(v) and v > 0)}
    if bad:
        raise ValueError(f"{kind} rates must be finite and > 0, got {bad}")
    if not rates["beta_lock"] < rates["beta_free"]:
        raise ValueError(
            f"{kind}: beta_lock must be below beta_free, got {rates['beta_lock']} >= {rates['beta_free']}"
        )


@dataclass(frozen=True)
class SeirParams:
    beta_lock: float
    beta_free: float
    delta: float
    epsilon: float

    name = "SEIR"
    compartments = ("S", "E", "I", "R")

    def __post_init__(self):
        _check_rates(self.name, beta_lock=self.beta_lock, beta_free=self.beta_free,
                     delta=self.delta, epsilon=self.epsilon)


@dataclass(frozen=True)
class SairParams:
    beta_lock: float
    beta_free: float
    delta: float
    eps1: float
    eps2: float

    name = "SAIR"
    compartments = ("S", "A", "I", "R")

    def __post_init__(self):
        _check_rates(self.name, beta_lock=self.beta_lock, beta_free=self.beta_free,
                     delta=self.delta, eps1=self.eps1, eps2=self.eps2)


@dataclass(frozen=True)
class SeairParams:
    beta_lock: float
    beta_free: float
    delta: float
    epsilon: float
    eps1: float
    eps2: float

    name = "SEAIR"
    compartments = ("S", "E", "A", "I", "R")

    def __post_init__(self):
        _check_rates(self.name, beta_lock=self.beta_lock, beta_free=self.beta_free,
                     delta=self.delta, epsilon=self.epsilon, eps1=self.eps1, eps2=self.eps2)


Model = Union[SeirParams, SairParams, SeairParams]
MODELS = {"SEIR": SeirParams, "SAIR": SairParams, "SEAIR": SeairParams}


def make_model(kind: str, **params) -> Model:
    try:
        cls = MODELS[kind.upper()]
    except KeyError:
        raise ValueError(f"unknown model '{kind}', expected one of {sorted(MODELS)}") from None
    return cls(**params)


@dataclass(frozen=True, eq=False)
class EpidemicState:
    names: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = linalg.as_vector(self.values, len(self.names), "state")
        if np.any(v < -SIMPLEX_TOL):
            neg = {n: float(x) for n, x in zip(self.names, v) if x < -SIMPLEX_TOL}
            raise ValueError(f"compartments must be >= 0, got {neg}")
        total = float(np.sum(v))
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"compartments must sum to 1, got {total:.12g}")
        object.__setattr__(self, "values", v)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict:
        return {n: float(x) for n, x in zip(self.names, self.values)}


@dataclass(frozen=True)
class ControlTarget:
    i0: float
    delta_poly: Poly

    def __post_init__(self):
        if not 0 < self.i0 < 1:
            raise ValueError(f"i0 must lie in (0, 1), got {self.i0}")
        if not self.delta_poly.is_monic():
            raise ValueError(f"delta_poly must be monic, got {self.delta_poly}")
        if self.delta_poly.degree >= 1 and not linalg.hurwitz_test(self.delta_poly):
            raise ValueError(f"delta_poly {self.delta_poly} is not Hurwitz")

    @classmethod
    def first_order(cls, i0: float, lam: float) -> "ControlTarget":
        return cls(i0, Poly((lam, 1.0)))

    @classmethod
    def second_order(cls, i0: float, d1: float, d0: float) -> "ControlTarget":
        return cls(i0, Poly((d0, d1, 1.0)))

    @property
    def lam(self) -> float:
        if self.delta_poly.degree != 1:
            raise ValueError(f"lambda is defined for first-order Delta only, got {self.delta_poly}")
        return self.delta_poly.coeffs[0]


def _expect_degree(model: Model, target: ControlTarget):
    want = 2 if isinstance(model, SeairParams) else 1
    if target.delta_poly.degree != want:
        raise ValueError(f"{model.name} needs Delta(s) of degree {want}, got {target.delta_poly}")


def initial_state(model: Model, **compartments: float) -> EpidemicState:
    """State from a partial assignment; S (or else R) closes the simplex."""
    names = model.compartments
    unknown = [k for k in compartments if k not in names]
    if unknown:
        raise ValueError(f"unknown compartments {unknown} for {model.name}, expected {list(names)}")
    filler = "S" if "S" not in compartments else "R"
    vals = {n: float(compartments.get(n, 0.0)) for n in names}
    vals[filler] = 1.0 - sum(v for n, v in vals.items() if n != filler)
    return EpidemicState(names, np.array([vals[n] for n in names]))


# -------------------------
# model equations
# -------------------------
def derivatives(model: Model, state, beta: float) -> np.ndarray:
    x = np.asarray(state.values if isinstance(state, EpidemicState) else state, dtype=float)
    if isinstance(model, SeirParams):
        S, E, I, _ = x
        inf = beta * S * I
        return np.array([-inf, inf - model.epsilon * E, model.epsilon * E - model.delta * I, model.delta * I])
    if isinstance(model, SairParams):
        S, A, I, _ = x
        inf = beta * S * (A + I)
        return np.array([
            -inf,
            inf - (model.eps1 + model.eps2) * A,
            model.eps1 * A - model.delta * I,
            model.eps2 * A + model.delta * I,
        ])
    if isinstance(model, SeairParams):
        S, E, A, I, _ = x
        inf = beta * S * (A + I)
        return np.array([
            -inf,
            inf - model.epsilon * E,
            model.epsilon * E - (model.eps1 + model.eps2) * A,
            model.eps1 * A - model.delta * I,
            model.eps2 * A + model.delta * I,
        ])
    raise TypeError(f"unsupported model {type(model).__name__}")


def reduced_plant(model: Model) -> Plant:
    if isinstance(model, SeirParams):
        e, d = model.epsilon, model.delta
        return Plant(F=[[-e, 0.0], [e, -d]], g=[1.0, 0.0], H=[0.0, 1.0])
    if isinstance(model, SairParams):
        e1, e2, d = model.eps1, model.eps2, model.delta
        return Plant(F=[[-(e1 + e2), 0.0], [e1, -d]], g=[1.0, 0.0], H=[1.0, 1.0])
    if isinstance(model, SeairParams):
        e, e1, e2, d = model.epsilon, model.eps1, model.eps2, model.delta
        return Plant(
            F=[[-e, 0.0, 0.0], [e, -(e1 + e2), 0.0], [0.0, e1, -d]],
            g=[1.0, 0.0, 0.0],
            H=[0.0, 1.0, 1.0],
        )
    raise TypeError(f"unsupported model {type(model).__name__}")


def reduced_indices(model: Model) -> List[int]:
    """Positions of the reduced-plant coordinates inside the full state."""
    names = model.compartments
    return [names.index(c) for c in names if c not in ("S", "R")]


def condition_threshold(model: Model) -> float:
    if isinstance(model, SeirParams):
        return model.delta
    return model.delta * (model.eps1 + model.eps2) / (model.delta + model.eps1)


def effective_gains(model: Model, S: float) -> Tuple[float, float]:
    return model.beta_lock * S, model.beta_free * S


def condition_status(model: Model, S: float) -> ConditionStatus:
    threshold = condition_threshold(model)
    gamma_l, gamma_f = effective_gains(model, S)
    if gamma_l >= threshold:
        return ConditionStatus.LOCK_TOO_WEAK
    if gamma_f <= threshold:
        return ConditionStatus.EPIDEMIC_DIES
    return ConditionStatus.FEASIBLE


# -------------------------
# switching law
# -------------------------
def lockdown_expression(model: Model, state, target: ControlTarget) -> float:
    """Positive means lockdown. Built from states and (delta, eps, lambda/Delta) only."""
    _expect_degree(model, target)
    x = np.asarray(state.values if isinstance(state, EpidemicState) else state, dtype=float)
    i0 = target.i0
    if isinstance(model, SeirParams):
        _, E, I, _ = x
        lam = target.lam
        return model.epsilon * E - model.delta * I + lam * (I - i0)
    if isinstance(model, SairParams):
        _, A, I, _ = x
        lam = target.lam
        return model.eps1 * A - model.delta * I + lam * (I - i0)
    _, E, A, I, _ = x
    d0, d1 = target.delta_poly.coeffs[0], target.delta_poly.coeffs[1]
    e, e1, e2, d = model.epsilon, model.eps1, model.eps2, model.delta
    i_dot = e1 * A - d * I
    i_ddot = e1 * (e * E - (e1 + e2) * A) - d * (e1 * A - d * I)
    return i_ddot + d1 * i_dot + d0 * (I - i0)


def lockdown_law(model: Model, state, target: ControlTarget) -> bool:
    return lockdown_expression(model, state, target) > 0.0


def closed_form_K(model: Model, target: ControlTarget) -> np.ndarray:
    _expect_degree(model, target)
    if isinstance(model, SeirParams):
        return np.array([-1.0, (model.delta - target.lam) / model.epsilon])
    if isinstance(model, SairParams):
        return np.array([-1.0, (model.delta - target.lam) / model.eps1])
    d0, d1 = target.delta_poly.coeffs[0], target.delta_poly.coeffs[1]
    e, e1, e2, d = model.epsilon, model.eps1, model.eps2, model.delta
    return np.array([-1.0, (e1 + e2 + d - d1) / e, -(d * d - d * d1 + d0) / (e * e1)])


def closed_form_x_eq(model: Model, target: ControlTarget) -> np.ndarray:
    """Reduced-coordinate equilibrium with the I component pinned at i0."""
    i0 = target.i0
    if isinstance(model, SeirParams):
        return np.array([model.delta / model.epsilon, 1.0]) * i0
    if isinstance(model, SairParams):
        return np.array([model.delta / model.eps1, 1.0]) * i0
    e, e1, e2, d = model.epsilon, model.eps1, model.eps2, model.delta
    return np.array([d * (e1 + e2) / (e * e1), d / e1, 1.0]) * i0


class EpidemicLaw:
    """sigma = -lockdown_expression: sigma < 0 selects I1 (lockdown, beta_lock)."""

    def __init__(self, model: Model, target: ControlTarget):
        _expect_degree(model, target)
        self.model = model
        self.target = target

    def sigma(self, x):
        return -lockdown_expression(self.model, x, self.target)

    def level(self, which, x):
        return self.model.beta_lock if which == Interval.I1 else self.model.beta_free

    def reported_gain(self, x, level):
        return level * float(x[0])


# -------------------------
# closed-loop run
# -------------------------
@dataclass(eq=False)
class EpidemicRun:
    model: Model
    target: ControlTarget
    trajectory: sim.Trajectory
    status: List[ConditionStatus] = field(default_factory=list)

    @property
    def names(self) -> Tuple[str, ...]:
        return self.model.compartments

    def column(self, name: str) -> np.ndarray:
        return self.trajectory.states[:, self.names.index(name)]

    @property
    def lockdown(self) -> np.ndarray:
        return np.array([w == Interval.I1.value for w in self.trajectory.intervals])

    @property
    def endgame_time(self) -> Optional[float]:
        """First time the epidemic can die on its own after sliding was reached."""
        onset = self.trajectory.first_onset()
        if onset is None:
            return None
        for t, st in zip(self.trajectory.times, self.status):
            if t >= onset.time and st == ConditionStatus.EPIDEMIC_DIES:
                return float(t)
        return None

    def status_changes(self) -> List[Tuple[float, ConditionStatus]]:
        changes, last = [], None
        for t, st in zip(self.trajectory.times, self.status):
            if st != last:
                changes.append((float(t), st))
                last = st
        return changes


def _validity(names: Tuple[str, ...]):
    def check(x: np.ndarray) -> Optional[str]:
        low = int(np.argmin(x))
        if x[low] < -SIMPLEX_TOL:
            return f"compartment {names[low]} negative ({x[low]:.3e})"
        drift = abs(float(np.sum(x)) - 1.0)
        if drift > SIMPLEX_TOL:
            return f"compartments sum drifted by {drift:.3e}"
        return None
    return check


def simulate_epidemic(model: Model, target: ControlTarget, x0, cfg: sim.SimConfig) -> EpidemicRun:
    state = x0 if isinstance(x0, EpidemicState) else EpidemicState(model.compartments, np.asarray(x0, dtype=float))
    if state.names != model.compartments:
        raise ValueError(f"state compartments {state.names} do not match {model.name} {model.compartments}")

    def rhs(x, beta):
        return derivatives(model, x, beta)

    law = EpidemicLaw(model, target)
    traj = sim.simulate_nonlinear(rhs, law, state.values, cfg, validity=_validity(model.compartments))
    status = [condition_status(model, float(S)) for S in traj.states[:, 0]]
    run = EpidemicRun(model, target, traj, status)
    logger.info("%s run: %d samples, onset=%s, endgame=%s", model.name, len(traj.times),
                traj.first_onset().time if traj.first_onset() else None, run.endgame_time)
    return run


def global_params(model: Model, target: ControlTarget, S: float = 1.0) -> GlobalParams:
    """Constant-gain snapshot at susceptible fraction S for the global analysis.

    SAIR keeps its own closed loop (eps1 into I, eps1 + eps2 out of A) and is
    flagged as derived by analogy.
    """
    if not 0 <= S <= 1:
        raise ValueError(f"S must lie in [0, 1], got {S}")
    gamma_l, gamma_f = effective_gains(model, S)
    if isinstance(model, SeirParams):
        return GlobalParams(gamma_f=gamma_f, gamma_l=gamma_l, delta=model.delta, epsilon=model.epsilon,
                            lam=target.lam, i0=target.i0, s=S)
    if isinstance(model, SairParams):
        return GlobalParams(gamma_f=gamma_f, gamma_l=gamma_l, delta=model.delta, epsilon=model.eps1,
                            eps2=model.eps2, lam=target.lam, i0=target.i0, s=S)
    raise ValueError("global analysis covers the two-dimensional SEIR and SAIR reductions only")
