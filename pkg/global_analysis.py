#!/usr/bin/env python3
"""
global_analysis.py

Global behaviour of the SEIR reduced loop on the (E, I) plane with two
constant effective gains gamma_F (freedom) and gamma_L (lockdown):

- Frobenius growth of the free dynamics and where it meets the sliding line
- sliding line geometry (segment or half line)
- which parts of the line the flow crosses in each direction
- the attractive sliding zone and whether repeated crossings are possible
- quadratic Lyapunov functions V_F, V_L and a grid certificate of V' < 0
- contraction of successive crossings along a simulated trajectory

Region convention: R_FREE = {eps E + (lam - delta) I < lam I0}, R_LOCK is the
rest of the positive quadrant, L is the line itself.

The SAIR reduction runs through the same classification on its own closed
loop [[-(eps1 + eps2) + gamma, gamma], [eps1, -delta]], with A in place of E
and eps1 in place of eps. The Lyapunov construction is SEIR only.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

import sim
from synthesis import Plant

logger = logging.getLogger(__name__)

# -------------------------
# Configuration
# -------------------------
EXCLUSION_FACTOR = 1e-3       # exclusion ball radius, in units of I0
DEFAULT_GRID_DENSITY = 500
LOCK_BOX_MARGIN = 1.1
ANALOGY_LABEL = "DERIVED-BY-ANALOGY"


class NotApplicable(ValueError):
    """The premises of an analysis step do not hold for these parameters."""


class LineKind(str, Enum):
    SEGMENT = "SEGMENT"
    HALF_LINE = "HALF_LINE"


class FreeRegime(str, Enum):
    BELOW_I1 = "I<I1"
    ANY = "any"
    ABOVE_I1 = "I>I1"
    DEGENERATE = "DEGENERATE"


class LockRegime(str, Enum):
    ABOVE_I2 = "I>I2"
    ANY = "any"
    BELOW_I2 = "I<I2"
    NOT_APPLICABLE = "NOT_APPLICABLE"


class ZoneCase(str, Enum):
    MULTIPLE_CROSSINGS = "MULTIPLE_CROSSINGS"      # lam > delta + (eps/delta) gamma_F
    ONE_CROSSING = "ONE_CROSSING"                  # middle band of lam
    TWO_CROSSINGS = "TWO_CROSSINGS"                # lam4 < lam < delta + (eps/delta) gamma_L
    ONE_CROSSING_SLOW = "ONE_CROSSING_SLOW"        # lam <= lam4
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class GlobalParams:
    gamma_f: float
    gamma_l: float
    delta: float
    epsilon: float
    lam: float
    i0: float
    s: float = 1.0
    eps2: Optional[float] = None      # SAIR: A also leaves at eps2; epsilon then holds eps1

    def __post_init__(self):
        rates = {"gamma_f": self.gamma_f, "gamma_l": self.gamma_l, "delta": self.delta,
                 "epsilon": self.epsilon, "lam": self.lam, "i0": self.i0}
        if self.eps2 is not None:
            rates["eps2"] = self.eps2
        bad = {k: v for k, v in rates.items() if not (math.isfinite(v) and v > 0)}
        if bad:
            raise ValueError(f"global parameters must be finite and > 0, got {bad}")

    @property
    def by_analogy(self) -> bool:
        return self.eps2 is not None

    @property
    def outflow(self) -> float:
        """Exit rate of the first reduced compartment (E, or A for SAIR)."""
        return self.epsilon + (self.eps2 or 0.0)

    @property
    def gain_coupling(self) -> float:
        # H = [1, 1] for SAIR: the gain multiplies A as well
        return 1.0 if self.by_analogy else 0.0

    @property
    def e0(self) -> float:
        return self.delta / self.epsilon * self.i0

    def closed_loop(self, gamma: float) -> np.ndarray:
        return np.array([[-self.outflow + self.gain_coupling * gamma, gamma],
                         [self.epsilon, -self.delta]])

    def threshold(self) -> float:
        """Gain at which the closed loop turns singular."""
        if self.by_analogy:
            return self.delta * self.outflow / (self.delta + self.epsilon)
        return self.delta

    def free_threshold(self) -> float:
        return self.delta + self.epsilon / self.delta * self.gamma_f

    def lock_threshold(self) -> float:
        return self.delta + self.epsilon / self.delta * self.gamma_l

    def rhs_zero(self, gamma: float) -> float:
        """lam at which the constant part of the line crossing rate changes sign."""
        return self.delta + self.outflow - self.gain_coupling * gamma


@dataclass(frozen=True)
class SlidingZone:
    lo: Optional[float]
    hi: Optional[float]
    whole_line: bool = False

    @property
    def empty(self) -> bool:
        return self.lo is None

    def contains(self, i: float) -> bool:
        return not self.empty and self.lo < i < self.hi


@dataclass
class Certificate:
    max_vdot_free: float
    max_vdot_lock: float
    argmax_free: Tuple[float, float]
    argmax_lock: Tuple[float, float]
    grid_density: int
    exclusion_radius: float
    lock_box: Tuple[float, float]
    a_f: float
    a_l: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GlobalReport:
    params: GlobalParams
    lambda_fr: float
    w_fr: Tuple[float, float]
    i_fr: float
    e_fr: float
    i_fr_lock: Optional[float]
    i_max: float
    line_kind: LineKind
    i_one: Optional[float]
    i_two: Optional[float]
    lambda_roots: Dict[str, Optional[float]]
    regime_free: FreeRegime
    regime_lock: LockRegime
    zone_case: ZoneCase
    sliding_zone: SlidingZone
    multiple_crossings_possible: bool
    a_f: Optional[float]
    a_l: Optional[float]
    orderings: Dict[str, bool] = field(default_factory=dict)
    certificate: Optional[Certificate] = None


# -------------------------
# Frobenius data and line geometry
# -------------------------
def _dominant(p: GlobalParams, gamma: float) -> Tuple[float, np.ndarray]:
    """Largest eigenvalue of the 2x2 closed loop and its positive eigenvector."""
    M = p.closed_loop(gamma)
    root = math.sqrt((M[0, 0] - M[1, 1]) ** 2 + 4.0 * M[0, 1] * M[1, 0])
    lam_dom = 0.5 * (M[0, 0] + M[1, 1] + root)
    return lam_dom, np.array([M[0, 0] - M[1, 1] + root, 2.0 * M[1, 0]])


def frobenius_free(p: GlobalParams) -> Tuple[float, np.ndarray, float]:
    """(lambda_FR, w_FR, I_FR) of F + g H gamma_F and its meeting point with the line."""
    lambda_fr, w_fr = _dominant(p, p.gamma_f)
    i_fr = p.lam / (p.lam + lambda_fr) * p.i0
    return lambda_fr, w_fr, i_fr


def frobenius_free_point(p: GlobalParams) -> Tuple[float, float]:
    lambda_fr, _, i_fr = frobenius_free(p)
    e_fr = p.lam * (p.delta + lambda_fr) / (p.epsilon * (p.lam + lambda_fr)) * p.i0
    return e_fr, i_fr


def lock_frobenius_intersection(p: GlobalParams) -> Optional[float]:
    """I where the dominant eigenvector of F + g H gamma_L meets the sliding line.

    None when the ray misses the positive part of the line.
    """
    lam_lock, _ = _dominant(p, p.gamma_l)
    if p.lam + lam_lock <= 0:
        return None
    return p.lam / (p.lam + lam_lock) * p.i0


def sliding_line_geometry(p: GlobalParams) -> Tuple[float, LineKind]:
    if p.lam > p.delta:
        return p.lam / (p.lam - p.delta) * p.i0, LineKind.SEGMENT
    return math.inf, LineKind.HALF_LINE


# -------------------------
# flow across the line
# -------------------------
# On the line, d/dt [eps X + (lam - delta) I] = _rhs(gamma) - _coeff(gamma) I.
def _coeff(p: GlobalParams, gamma: float) -> float:
    return (p.lam - p.delta) * (p.lam - p.outflow + p.gain_coupling * gamma) - p.epsilon * gamma


def _rhs(p: GlobalParams, gamma: float) -> float:
    return p.lam * (p.lam - p.rhs_zero(gamma)) * p.i0


def _det(p: GlobalParams, gamma: float) -> float:
    return p.delta * (p.outflow - p.gain_coupling * gamma) - p.epsilon * gamma


def free_roots(p: GlobalParams) -> Tuple[float, float]:
    """(lambda1, lambda2) with _coeff(gamma_F) = (lam - l1)(lam + l2) as a polynomial in lam.

    SEIR: lam^2 - (delta+eps) lam - eps(gamma_F - delta).
    """
    s = p.rhs_zero(p.gamma_f)
    disc = s * s - 4.0 * _det(p, p.gamma_f)
    if disc < 0:
        raise NotApplicable(f"free-side quadratic has complex roots (discriminant {disc:.3e})")
    r = math.sqrt(disc)
    return 0.5 * (s + r), -0.5 * (s - r)


def lock_roots(p: GlobalParams) -> Tuple[float, float]:
    """(lambda3, lambda4), roots of _coeff(gamma_L) in lam, lambda3 > lambda4.

    SEIR: lam^2 - (delta+eps) lam + eps(delta - gamma_L).
    """
    det = _det(p, p.gamma_l)
    if not det > 0:
        raise NotApplicable(f"gamma_L={p.gamma_l} must be below the threshold {p.threshold():.6g}")
    s = p.rhs_zero(p.gamma_l)
    r = math.sqrt(s * s - 4.0 * det)
    return 0.5 * (s + r), 0.5 * (s - r)


def flow_free_regime(p: GlobalParams) -> Tuple[FreeRegime, Optional[float]]:
    """Part of the line where the free flow crosses into R_LOCK."""
    denom = _coeff(p, p.gamma_f)
    i_one = _rhs(p, p.gamma_f) / denom if abs(denom) > 1e-300 else None
    if not p.gamma_f > p.threshold():
        logger.warning("gamma_F=%.6g <= threshold %.6g: no Frobenius growth, free regime degenerate",
                       p.gamma_f, p.threshold())
        return FreeRegime.DEGENERATE, i_one
    if p.lam > p.free_threshold():
        regime = FreeRegime.BELOW_I1
    elif p.lam >= p.rhs_zero(p.gamma_f):
        regime = FreeRegime.ANY
    else:
        regime = FreeRegime.ABOVE_I1
    if regime != FreeRegime.ANY and i_one is None:
        raise NotApplicable("I1 denominator vanishes outside the 'any' regime")
    return regime, i_one


def flow_lock_regime(p: GlobalParams) -> Tuple[LockRegime, Optional[float]]:
    """Part of the line where the lockdown flow crosses back into R_FREE."""
    denom = _coeff(p, p.gamma_l)
    i_two = _rhs(p, p.gamma_l) / denom if abs(denom) > 1e-300 else None
    try:
        _, lam4 = lock_roots(p)
    except NotApplicable:
        return LockRegime.NOT_APPLICABLE, i_two
    if p.lam > p.rhs_zero(p.gamma_l):
        return LockRegime.ABOVE_I2, i_two
    if p.lam >= p.lock_threshold():
        return LockRegime.ANY, i_two
    if p.lam > lam4:
        return LockRegime.BELOW_I2, i_two
    return LockRegime.ANY, i_two


def _solve_side(coeff: float, rhs: float, less: bool, i_max: float) -> Optional[Tuple[float, float]]:
    """Interval of I in [0, i_max] with coeff*I < rhs (less) or coeff*I > rhs."""
    if not less:
        coeff, rhs = -coeff, -rhs
    if coeff == 0.0:
        return (0.0, i_max) if rhs > 0 else None
    bound = rhs / coeff
    if coeff > 0:
        lo, hi = 0.0, min(bound, i_max)
    else:
        lo, hi = max(bound, 0.0), i_max
    return (lo, hi) if lo < hi else None


def attractive_zone(p: GlobalParams) -> Tuple[SlidingZone, bool, ZoneCase]:
    """Sliding zone (I range attractive from both sides) and whether repeated crossings can occur."""
    i_max, _ = sliding_line_geometry(p)
    free = _solve_side(_coeff(p, p.gamma_f), _rhs(p, p.gamma_f), True, i_max)
    lock = _solve_side(_coeff(p, p.gamma_l), _rhs(p, p.gamma_l), False, i_max)
    if free is None or lock is None:
        zone = SlidingZone(None, None)
    else:
        lo, hi = max(free[0], lock[0]), min(free[1], lock[1])
        if lo < hi:
            zone = SlidingZone(lo, hi, whole_line=(lo <= 0.0 and hi >= i_max))
        else:
            zone = SlidingZone(None, None)

    if p.lam > p.free_threshold():
        case = ZoneCase.MULTIPLE_CROSSINGS
    elif p.lam >= p.lock_threshold():
        case = ZoneCase.ONE_CROSSING
    else:
        try:
            _, lam4 = lock_roots(p)
            case = ZoneCase.TWO_CROSSINGS if p.lam > lam4 else ZoneCase.ONE_CROSSING_SLOW
        except NotApplicable:
            case = ZoneCase.NOT_APPLICABLE
    return zone, case == ZoneCase.MULTIPLE_CROSSINGS, case


# -------------------------
# Lyapunov functions
# -------------------------
def lyapunov_coeffs(p: GlobalParams) -> Tuple[float, float]:
    """a_F, a_L making V_i = eps (E-E0)^2 + delta (I - a_i I0)^2 decrease along the whole segment."""
    if p.by_analogy:
        raise NotApplicable("Lyapunov construction is derived for the SEIR reduction only")
    if not p.lam > p.delta:
        raise NotApplicable(f"Lyapunov construction needs lam > delta, got lam={p.lam}, delta={p.delta}")

    def coeff(gamma: float) -> float:
        return (p.delta ** 2 + gamma * (p.lam - p.delta)) / (p.lam * p.delta)

    a_f, a_l = coeff(p.gamma_f), coeff(p.gamma_l)
    if p.gamma_f > p.delta > p.gamma_l and not (a_f > 1.0 > a_l > 0.0):
        logger.warning("unexpected Lyapunov coefficients a_F=%.6g a_L=%.6g", a_f, a_l)
    return a_f, a_l


def vdot(p: GlobalParams, gamma: float, a: float, E, I):
    """Time derivative of V along the constant-gain flow with gain gamma."""
    e, d, i0 = p.epsilon, p.delta, p.i0
    return (-2.0 * (e * E - d * I) ** 2
            + 2.0 * e * (gamma - d) * E * I
            + 2.0 * e * d * (1.0 - a) * i0 * E
            + 2.0 * d * (a * d - gamma) * i0 * I)


def _line_points(p: GlobalParams, density: int) -> Tuple[np.ndarray, np.ndarray]:
    """Samples of the segment E = E0 - m x, I = I0 + x, geometric near the equilibrium."""
    m = (p.lam - p.delta) / p.epsilon
    x_lo, x_hi = -p.i0, p.delta / (p.lam - p.delta) * p.i0
    uniform = np.linspace(x_lo, x_hi, 4 * density)
    near = np.logspace(-7, 0, density)
    x = np.concatenate([uniform, -near * p.i0, near * x_hi])
    return p.e0 - m * x, p.i0 + x


def _excluded(p: GlobalParams, E: np.ndarray, I: np.ndarray, radius: float) -> np.ndarray:
    return (np.hypot(E, I) < radius) | (np.hypot(E - p.e0, I - p.i0) < radius)


def _masked_max(values: np.ndarray, E: np.ndarray, I: np.ndarray) -> Tuple[float, Tuple[float, float]]:
    if values.size == 0:
        return -math.inf, (math.nan, math.nan)
    k = int(np.argmax(values))
    return float(values[k]), (float(E[k]), float(I[k]))


def certify_vdot_negative(p: GlobalParams, grid_density: int = DEFAULT_GRID_DENSITY,
                          a_override: Optional[Tuple[float, float]] = None) -> Certificate:
    """Grid certificate that V'_F < 0 on R_FREE u L and V'_L < 0 on R_LOCK u L.

    The lock region is unbounded; it is cut at the radius beyond which the
    negative-definite quadratic part of V'_L dominates its linear part.
    """
    if p.by_analogy:
        raise NotApplicable("V' certificate is derived for the SEIR reduction only")
    if not p.lam > p.delta:
        raise NotApplicable("V' certificate needs a sliding segment (lam > delta)")
    a_f, a_l = a_override if a_override is not None else lyapunov_coeffs(p)
    e, d, lam, i0 = p.epsilon, p.delta, p.lam, p.i0
    i_max, _ = sliding_line_geometry(p)
    e_max = lam * i0 / e
    radius = EXCLUSION_FACTOR * i0
    line_E, line_I = _line_points(p, grid_density)

    def region_max(E, I, gamma, a):
        keep = ~_excluded(p, E, I, radius)
        E, I = E[keep], I[keep]
        return _masked_max(vdot(p, gamma, a, E, I), E, I)

    # free side: triangle under the line
    Eg, Ig = np.meshgrid(np.linspace(0.0, e_max, grid_density), np.linspace(0.0, i_max, grid_density))
    Eg, Ig = Eg.ravel(), Ig.ravel()
    under = e * Eg + (lam - d) * Ig <= lam * i0
    E_free = np.concatenate([Eg[under], line_E])
    I_free = np.concatenate([Ig[under], line_I])
    max_free, arg_free = region_max(E_free, I_free, p.gamma_f, a_f)

    # lock side: box up to the quadratic-dominance radius
    P = np.array([[2 * e * e, -e * (d + p.gamma_l)], [-e * (d + p.gamma_l), 2 * d * d]])
    lin = np.array([2 * e * d * (1 - a_l) * i0, 2 * d * (a_l * d - p.gamma_l) * i0])
    lam_min = float(np.linalg.eigvalsh(P)[0])
    if lam_min <= 0:
        logger.warning("lock quadratic form is not negative definite (gamma_L >= delta)")
        r_dom = 10.0 * max(e_max, i_max)
    else:
        r_dom = float(np.linalg.norm(lin)) / lam_min
    box_e = LOCK_BOX_MARGIN * max(r_dom, e_max)
    box_i = LOCK_BOX_MARGIN * max(r_dom, i_max)
    Eg, Ig = np.meshgrid(np.linspace(0.0, box_e, grid_density), np.linspace(0.0, box_i, grid_density))
    Eg, Ig = Eg.ravel(), Ig.ravel()
    over = e * Eg + (lam - d) * Ig >= lam * i0
    E_lock = np.concatenate([Eg[over], line_E])
    I_lock = np.concatenate([Ig[over], line_I])
    max_lock, arg_lock = region_max(E_lock, I_lock, p.gamma_l, a_l)

    cert = Certificate(
        max_vdot_free=max_free,
        max_vdot_lock=max_lock,
        argmax_free=arg_free,
        argmax_lock=arg_lock,
        grid_density=grid_density,
        exclusion_radius=radius,
        lock_box=(box_e, box_i),
        a_f=a_f,
        a_l=a_l,
        passed=bool(max_free < 0 and max_lock < 0),
    )
    logger.info("V' certificate: free max %.3e, lock max %.3e, pass=%s", max_free, max_lock, cert.passed)
    return cert


# -------------------------
# trajectories
# -------------------------
def contraction_probe(traj: sim.Trajectory, p: GlobalParams, component: int = -1) -> bool:
    """Successive crossings close in on I0 from both sides until sliding starts.

    Lower hits (I < I0) must strictly increase and upper hits strictly
    decrease, so |I - I0| shrinks over every free -> lock -> free loop.
    """
    lower, upper = sim.crossing_sequence(traj, component=component, split_at=p.i0)
    if len(lower) + len(upper) < 2:
        return True
    ok = all(b > a for a, b in zip(lower, lower[1:])) and all(b < a for a, b in zip(upper, upper[1:]))
    if not ok:
        logger.warning("crossings do not contract: lower=%s upper=%s", lower, upper)
    return ok


@dataclass
class LineScan:
    points: np.ndarray
    attractive: np.ndarray
    free_to_lock: np.ndarray
    lock_to_free: np.ndarray

    def zone_intervals(self, component: int = -1) -> List[Tuple[float, float]]:
        """Maximal runs of attractive samples, reported in the chosen component."""
        runs, start = [], None
        vals = self.points[:, component]
        for k, flag in enumerate(self.attractive):
            if flag and start is None:
                start = k
            if not flag and start is not None:
                runs.append((start, k - 1))
                start = None
        if start is not None:
            runs.append((start, len(self.attractive) - 1))
        return [tuple(sorted((float(vals[a]), float(vals[b])))) for a, b in runs]


def scan_sliding_line(plant: Plant, K, x_eq, gamma_l: float, gamma_f: float,
                      samples: int = 2001, span: float = 5.0, positive_only: bool = True) -> LineScan:
    """Numerical attractive zone of a two-dimensional loop.

    Samples the line K (x - x_eq) = 0 and checks the sign of K x' under both
    gains: attractive where the free flow (sigma > 0 side) moves to sigma < 0
    and the lockdown flow moves to sigma > 0.
    """
    K = np.asarray(K, dtype=float)
    x_eq = np.asarray(x_eq, dtype=float)
    if plant.n != 2:
        raise ValueError(f"scan_sliding_line needs a two-dimensional plant, got n={plant.n}")
    sign = 1.0 if float(plant.H @ x_eq) >= 0 else -1.0
    v = np.array([K[1], -K[0]])
    v /= np.linalg.norm(v)
    scale = float(np.linalg.norm(x_eq))
    s = np.linspace(-span * scale, span * scale, samples)
    pts = x_eq[None, :] + s[:, None] * v[None, :]
    if positive_only:
        pts = pts[np.all(pts >= 0.0, axis=1)]
    A_f = plant.closed_loop(gamma_f)
    A_l = plant.closed_loop(gamma_l)
    rate_f = sign * (pts @ A_f.T) @ K
    rate_l = sign * (pts @ A_l.T) @ K
    free_to_lock = rate_f < 0
    lock_to_free = rate_l > 0
    order = np.argsort(pts[:, -1])
    return LineScan(points=pts[order], attractive=(free_to_lock & lock_to_free)[order],
                    free_to_lock=free_to_lock[order], lock_to_free=lock_to_free[order])


# -------------------------
# report
# -------------------------
def _orderings(p: GlobalParams, case: ZoneCase, i_fr: float, i_max: float,
               i_one: Optional[float], i_two: Optional[float]) -> Dict[str, bool]:
    checks = {"0<I_FR<I0": bool(0.0 < i_fr < p.i0)}
    if case == ZoneCase.MULTIPLE_CROSSINGS and i_one is not None and i_two is not None:
        checks["I_MAX>I1>I0>I2>I_FR>0"] = bool(i_max > i_one > p.i0 > i_two > i_fr > 0.0)
    if case == ZoneCase.TWO_CROSSINGS and i_one is not None and i_two is not None:
        checks["I_MAX>I2>I0>I_FR>I1>0"] = bool(i_max > i_two > p.i0 > i_fr > i_one > 0.0)
    return checks


def global_report(p: GlobalParams, certify: bool = False,
                  grid_density: int = DEFAULT_GRID_DENSITY) -> GlobalReport:
    lambda_fr, w_fr, i_fr = frobenius_free(p)
    e_fr, _ = frobenius_free_point(p)
    i_max, kind = sliding_line_geometry(p)
    regime_free, i_one = flow_free_regime(p)
    regime_lock, i_two = flow_lock_regime(p)
    zone, multiple, case = attractive_zone(p)

    roots: Dict[str, Optional[float]] = {"lambda1": None, "lambda2": None, "lambda3": None, "lambda4": None}
    try:
        roots["lambda1"], roots["lambda2"] = free_roots(p)
    except NotApplicable:
        pass
    try:
        roots["lambda3"], roots["lambda4"] = lock_roots(p)
    except NotApplicable:
        pass

    try:
        a_f, a_l = lyapunov_coeffs(p)
    except NotApplicable:
        a_f = a_l = None

    certificate = None
    if certify and a_f is not None:
        certificate = certify_vdot_negative(p, grid_density)

    orderings = _orderings(p, case, i_fr, i_max, i_one, i_two)
    failed = [k for k, ok in orderings.items() if not ok]
    if failed:
        logger.warning("ordering checks failed: %s", failed)

    return GlobalReport(
        params=p,
        lambda_fr=lambda_fr,
        w_fr=(float(w_fr[0]), float(w_fr[1])),
        i_fr=i_fr,
        e_fr=e_fr,
        i_fr_lock=lock_frobenius_intersection(p),
        i_max=i_max,
        line_kind=kind,
        i_one=i_one,
        i_two=i_two,
        lambda_roots=roots,
        regime_free=regime_free,
        regime_lock=regime_lock,
        zone_case=case,
        sliding_zone=zone,
        multiple_crossings_possible=multiple,
        a_f=a_f,
        a_l=a_l,
        orderings=orderings,
        certificate=certificate,
    )


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def report_to_dict(report: GlobalReport) -> dict:
    p = report.params
    zone = report.sliding_zone
    out = {
        "params": asdict(p),
        "lambda_fr": report.lambda_fr,
        "w_fr": list(report.w_fr),
        "i_fr": report.i_fr,
        "e_fr": report.e_fr,
        "i_fr_lock": report.i_fr_lock,
        "i_max": _jsonable(report.i_max),
        "line_kind": report.line_kind.value,
        "i_one": report.i_one,
        "i_two": report.i_two,
        "lambda_roots": report.lambda_roots,
        "regime_free": report.regime_free.value,
        "regime_lock": report.regime_lock.value,
        "zone_case": report.zone_case.value,
        "sliding_zone": "WHOLE_LINE" if zone.whole_line else
                        (None if zone.empty else [_jsonable(zone.lo), _jsonable(zone.hi)]),
        "multiple_crossings_possible": report.multiple_crossings_possible,
        "a_f": report.a_f,
        "a_l": report.a_l,
        "orderings": report.orderings,
        "provenance": ANALOGY_LABEL if p.by_analogy else "SEIR",
    }
    if report.certificate is not None:
        cert = report.certificate.to_dict()
        out["certificate"] = {k: ([_jsonable(v) for v in val] if isinstance(val, (list, tuple)) else _jsonable(val))
                              for k, val in cert.items()}
    return out
