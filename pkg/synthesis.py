#!/usr/bin/env python3
"""
synthesis.py

Sliding-mode controller synthesis for x' = F x + g u, u = H x gamma(t),
when gamma is only allowed to live in one of two disjoint intervals
I1 = [i1_lo, i1_hi] and I2 = [i2_lo, i2_hi].

Pipeline:
  1. check_feasibility  -> (F, g) controllable and det changes sign between I1 and I2
  2. compute_gamma0     -> det(F + g H gamma0) = 0, gamma0 between the intervals
  3. compute_x_eq       -> kernel of F + g H gamma0, scaled so H x_eq = setpoint
  4. compute_K          -> surface K x = K x_eq with reduced dynamics Delta(s)

The switching law picks I1 when sigma = (H x_eq) K (x - x_eq) < 0 and I2 when
sigma > 0. Gain selection inside an interval is left to a GainSelector.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

import linalg
from linalg import Poly

logger = logging.getLogger(__name__)

# -------------------------
# Configuration
# -------------------------
DEFAULT_MU = 1.05
DEFAULT_HYSTERESIS_BAND = 1e-6
GAMMA0_REL_TOL = 1e-9
X_EQ_RESIDUAL = 1e-9


class SynthesisError(ValueError):
    """Synthesis precondition violated while building a controller."""


class GainTraceError(ValueError):
    """External gain trace is exhausted or leaves its designated interval."""


class Interval(str, Enum):
    I1 = "I1"
    I2 = "I2"


class FailureReason(str, Enum):
    NOT_CONTROLLABLE = "NOT_CONTROLLABLE"
    DET_PRODUCT_NONNEGATIVE = "DET_PRODUCT_NONNEGATIVE"


class SelectionPolicy(str, Enum):
    LOWER_ENDPOINT = "LOWER_ENDPOINT"
    UPPER_ENDPOINT = "UPPER_ENDPOINT"
    MIDPOINT = "MIDPOINT"
    RANDOM_UNIFORM = "RANDOM_UNIFORM"
    EXTERNAL_TRACE = "EXTERNAL_TRACE"


# -------------------------
# data types
# -------------------------
@dataclass(frozen=True, eq=False)
class Plant:
    F: np.ndarray
    g: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        F = linalg.as_square(self.F, "F")
        n = F.shape[0]
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "g", linalg.as_vector(self.g, n, "g"))
        object.__setattr__(self, "H", linalg.as_vector(self.H, n, "H"))

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def closed_loop(self, gamma: float) -> np.ndarray:
        return self.F + gamma * np.outer(self.g, self.H)


@dataclass(frozen=True)
class GainIntervals:
    i1_lo: float
    i1_hi: float
    i2_lo: float
    i2_hi: float

    def __post_init__(self):
        vals = (self.i1_lo, self.i1_hi, self.i2_lo, self.i2_hi)
        if not all(np.isfinite(vals)):
            raise ValueError(f"gain bounds must be finite, got {vals}")
        if not (self.i1_lo <= self.i1_hi < self.i2_lo <= self.i2_hi):
            raise ValueError(
                f"gain intervals must satisfy i1_lo <= i1_hi < i2_lo <= i2_hi, got {vals}"
            )

    def bounds(self, which: Interval) -> Tuple[float, float]:
        if which == Interval.I1:
            return self.i1_lo, self.i1_hi
        return self.i2_lo, self.i2_hi

    def contains(self, which: Interval, gamma: float) -> bool:
        lo, hi = self.bounds(which)
        return lo <= gamma <= hi


@dataclass(frozen=True)
class FeasibilityReport:
    controllable: bool
    det_at_i1_hi: float
    det_at_i2_lo: float
    det_product: float
    feasible: bool
    failure_reason: Optional[FailureReason] = None

    def to_dict(self) -> dict:
        return {
            "controllable": self.controllable,
            "det_at_i1_hi": self.det_at_i1_hi,
            "det_at_i2_lo": self.det_at_i2_lo,
            "det_product": self.det_product,
            "feasible": self.feasible,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }


@dataclass(frozen=True, eq=False)
class Controller:
    K: np.ndarray
    x_eq: np.ndarray
    gamma0: float
    sign_h_xeq: float
    delta_poly: Poly
    hysteresis_band: float = DEFAULT_HYSTERESIS_BAND
    gains: Optional[GainIntervals] = None

    def __post_init__(self):
        K = linalg.as_vector(self.K, name="K")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "x_eq", linalg.as_vector(self.x_eq, K.shape[0], "x_eq"))
        if self.sign_h_xeq not in (-1.0, 1.0):
            raise ValueError(f"sign_h_xeq must be +1 or -1, got {self.sign_h_xeq}")
        if self.hysteresis_band < 0:
            raise ValueError(f"hysteresis_band must be >= 0, got {self.hysteresis_band}")


@dataclass
class GainSelector:
    """Chooses gamma inside the designated interval.

    RANDOM_UNIFORM and EXTERNAL_TRACE keep state; do not share one selector
    between concurrent simulations. reset() restores the initial state.
    """
    policy: SelectionPolicy = SelectionPolicy.MIDPOINT
    seed: Optional[int] = None
    trace: Sequence[float] = ()
    _rng: np.random.Generator = field(init=False, repr=False)
    _cursor: int = field(init=False, default=0, repr=False)

    def __post_init__(self):
        self.policy = SelectionPolicy(self.policy)
        if self.policy == SelectionPolicy.EXTERNAL_TRACE and len(self.trace) == 0:
            raise ValueError("EXTERNAL_TRACE policy needs a non-empty trace")
        self.reset()

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        self._cursor = 0

    def draw(self, gains: GainIntervals, which: Interval) -> float:
        lo, hi = gains.bounds(which)
        if self.policy == SelectionPolicy.LOWER_ENDPOINT:
            return lo
        if self.policy == SelectionPolicy.UPPER_ENDPOINT:
            return hi
        if self.policy == SelectionPolicy.MIDPOINT:
            return 0.5 * (lo + hi)
        if self.policy == SelectionPolicy.RANDOM_UNIFORM:
            return float(self._rng.uniform(lo, hi)) if hi > lo else lo

        if self._cursor >= len(self.trace):
            raise GainTraceError(f"gain trace exhausted after {self._cursor} values")
        gamma = float(self.trace[self._cursor])
        self._cursor += 1
        if not gains.contains(which, gamma):
            raise GainTraceError(
                f"trace value {gamma} at position {self._cursor - 1} is outside {which.value}=[{lo}, {hi}]"
            )
        return gamma


@dataclass(frozen=True, eq=False)
class InvariantBall:
    P: np.ndarray
    mu: float
    u_max: float
    a: float
    radius: float


# -------------------------
# synthesis pipeline
# -------------------------
def check_feasibility(plant: Plant, gains: GainIntervals) -> FeasibilityReport:
    R = linalg.controllability_matrix(plant.F, plant.g)
    controllable = linalg.rank(R) == plant.n
    d1 = linalg.det(plant.closed_loop(gains.i1_hi))
    d2 = linalg.det(plant.closed_loop(gains.i2_lo))
    product = d1 * d2

    reason = None
    if not controllable:
        reason = FailureReason.NOT_CONTROLLABLE
    elif not product < 0:
        reason = FailureReason.DET_PRODUCT_NONNEGATIVE

    report = FeasibilityReport(
        controllable=controllable,
        det_at_i1_hi=d1,
        det_at_i2_lo=d2,
        det_product=product,
        feasible=reason is None,
        failure_reason=reason,
    )
    logger.info("feasibility: feasible=%s det_product=%.6g reason=%s",
                report.feasible, product, reason.value if reason else None)
    return report


def compute_gamma0(plant: Plant, gains: GainIntervals) -> float:
    """Root of the affine map gamma -> det(F + g H gamma) inside (i1_hi, i2_lo)."""
    d1 = linalg.det(plant.closed_loop(gains.i1_hi))
    d2 = linalg.det(plant.closed_loop(gains.i2_lo))
    if not d1 * d2 < 0:
        raise SynthesisError(
            f"det(F+gH*gamma) does not change sign on [{gains.i1_hi}, {gains.i2_lo}] "
            f"(values {d1:.6g}, {d2:.6g})"
        )
    gamma0 = gains.i1_hi + d1 * (gains.i2_lo - gains.i1_hi) / (d1 - d2)
    check = linalg.det(plant.closed_loop(gamma0))
    if abs(check) > GAMMA0_REL_TOL * max(abs(d1), abs(d2)):
        raise SynthesisError(f"det at gamma0={gamma0:.12g} is {check:.3e}, expected 0")
    return float(gamma0)


def compute_x_eq(plant: Plant, gamma0: float, setpoint: float,
                 normalize_index: Optional[int] = None) -> np.ndarray:
    """Equilibrium on the kernel of F + g H gamma0.

    Scaled so H x_eq = setpoint, or x_eq[normalize_index] = setpoint when an
    index is given (the SAIR convention pins I rather than A + I).
    """
    if not setpoint > 0:
        raise ValueError(f"setpoint must be > 0, got {setpoint}")
    M = plant.closed_loop(gamma0)
    v = linalg.null_vector(M)

    if normalize_index is None:
        ref = float(plant.H @ v)
        scale = float(np.linalg.norm(plant.H))
        label = "H.x_eq"
    else:
        if not 0 <= normalize_index < plant.n:
            raise ValueError(f"normalize_index {normalize_index} out of range for n={plant.n}")
        ref = float(v[normalize_index])
        scale = 1.0
        label = f"x_eq[{normalize_index}]"
    if abs(ref) <= linalg.RANK_TOL * max(scale, 1.0):
        raise SynthesisError(f"{label} vanishes on the equilibrium direction {v}")

    x_eq = v * (setpoint / ref)
    residual = float(np.linalg.norm(M @ x_eq))
    if residual > X_EQ_RESIDUAL * max(1.0, float(np.linalg.norm(x_eq))):
        logger.warning("x_eq residual %.3e", residual)
    return x_eq


def compute_K(plant: Plant, delta: Poly) -> np.ndarray:
    """K = K_c R_c R^{-1}, K_c = [-D0, ..., -D_{n-2}, -1] for Delta(s) = s^{n-1} + ... + D0."""
    n = plant.n
    if delta.degree != n - 1:
        raise ValueError(f"Delta must have degree {n - 1}, got {delta.degree}")
    if not delta.is_monic():
        raise ValueError(f"Delta must be monic, leading coefficient is {delta.leading}")
    if n > 1 and not linalg.hurwitz_test(delta):
        raise ValueError(f"Delta(s) = {delta} is not Hurwitz")

    R = linalg.controllability_matrix(plant.F, plant.g)
    if linalg.rank(R) < n:
        raise SynthesisError("(F, g) is not controllable, controllability matrix is singular")
    Fc, gc = linalg.companion_pair(linalg.char_poly(plant.F))
    Rc = linalg.controllability_matrix(Fc, gc)
    Kc = -np.asarray(delta.coeffs)
    return Kc @ Rc @ linalg.matrix_inverse_small(R)


def switching_sigma(ctrl: Controller, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(ctrl.sign_h_xeq * (ctrl.K @ (x - ctrl.x_eq)))


def select_interval(sigma: float, previous: Optional[Interval], band: float) -> Interval:
    if band < 0:
        raise ValueError(f"hysteresis_band must be >= 0, got {band}")
    if sigma < -band:
        return Interval.I1
    if sigma > band:
        return Interval.I2
    return previous if previous is not None else Interval.I2


def select_gain(selector: GainSelector, gains: GainIntervals, sigma: float,
                previous_interval: Optional[Interval], hysteresis_band: float) -> Tuple[Interval, float]:
    which = select_interval(sigma, previous_interval, hysteresis_band)
    return which, selector.draw(gains, which)


def invariant_ball_bound(F, g, u_max: float, mu: float = DEFAULT_MU) -> InvariantBall:
    """Radius of a ball containing every solution of x' = F x + g u from 0, |u| <= u_max."""
    if not mu > 1:
        raise ValueError(f"mu must be > 1, got {mu}")
    if u_max < 0:
        raise ValueError(f"u_max must be >= 0, got {u_max}")
    A = linalg.as_square(F, "F")
    gv = linalg.as_vector(g, A.shape[0], "g")
    if not linalg.hurwitz_test(linalg.char_poly(A)):
        raise SynthesisError("F is not Hurwitz")
    P = linalg.lyapunov_solve(A)
    lam_min, lam_max = linalg.symmetric_extreme_eigs(P)
    a = 2.0 * mu * float(np.linalg.norm(P @ gv)) * np.sqrt(lam_max / lam_min)
    return InvariantBall(P=P, mu=mu, u_max=u_max, a=float(a), radius=float(a * u_max))


LemmaBound = InvariantBall
lemma_invariant_bound = invariant_ball_bound


def sliding_reduced_poly(plant: Plant, K) -> Poly:
    """Characteristic polynomial of the ideal sliding motion on K x = K x_eq.

    The equivalent-control closed loop (I - g K / (K g)) F has one root at 0
    along the surface normal; it is divided out.
    """
    K = linalg.as_vector(K, plant.n, "K")
    Kg = float(K @ plant.g)
    if Kg == 0.0:
        raise SynthesisError("K g = 0, the surface admits no equivalent control")
    A = (np.eye(plant.n) - np.outer(plant.g, K) / Kg) @ plant.F
    c = linalg.char_poly(A).coeffs
    if abs(c[0]) > 1e-8 * max(1.0, max(abs(x) for x in c)):
        logger.warning("sliding dynamics constant term %.3e is not 0", c[0])
    return Poly(c[1:])


def synthesize(plant: Plant, gains: GainIntervals, delta: Poly, setpoint: float,
               normalize_index: Optional[int] = None,
               hysteresis_band: float = DEFAULT_HYSTERESIS_BAND) -> Tuple[Optional[Controller], FeasibilityReport]:
    report = check_feasibility(plant, gains)
    if not report.feasible:
        logger.warning("plant infeasible: %s", report.failure_reason.value)
        return None, report
    gamma0 = compute_gamma0(plant, gains)
    x_eq = compute_x_eq(plant, gamma0, setpoint, normalize_index)
    K = compute_K(plant, delta)
    sign = 1.0 if float(plant.H @ x_eq) >= 0 else -1.0
    ctrl = Controller(K=K, x_eq=x_eq, gamma0=gamma0, sign_h_xeq=sign,
                      delta_poly=delta, hysteresis_band=hysteresis_band, gains=gains)
    logger.info("controller: gamma0=%.12g K=%s x_eq=%s", gamma0, K, x_eq)
    return ctrl, report


# -------------------------
# JSON round trip
# -------------------------
def controller_to_dict(ctrl: Controller) -> dict:
    return {
        "K": [float(v) for v in ctrl.K],
        "x_eq": [float(v) for v in ctrl.x_eq],
        "gamma0": float(ctrl.gamma0),
        "sign_h_xeq": float(ctrl.sign_h_xeq),
        "delta_poly": [float(c) for c in ctrl.delta_poly.coeffs],
        "hysteresis_band": float(ctrl.hysteresis_band),
        "gains": gains_to_dict(ctrl.gains) if ctrl.gains is not None else None,
    }


def gains_to_dict(gains: GainIntervals) -> dict:
    return {"i1_lo": gains.i1_lo, "i1_hi": gains.i1_hi, "i2_lo": gains.i2_lo, "i2_hi": gains.i2_hi}


def controller_from_dict(d: dict) -> Controller:
    gains = d.get("gains")
    return Controller(
        gains=GainIntervals(**gains) if gains else None,
        K=np.asarray(d["K"], dtype=float),
        x_eq=np.asarray(d["x_eq"], dtype=float),
        gamma0=float(d["gamma0"]),
        sign_h_xeq=float(d["sign_h_xeq"]),
        delta_poly=Poly(tuple(d["delta_poly"])),
        hysteresis_band=float(d.get("hysteresis_band", DEFAULT_HYSTERESIS_BAND)),
    )
