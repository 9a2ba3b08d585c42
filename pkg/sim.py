#!/usr/bin/env python3
"""
sim.py

Fixed-step RK4 integration of switched closed loops with event extraction.

- SURFACE_CROSSING : sigma changes sign inside a step (located by bisection)
- SLIDING_ONSET    : |sigma| <= sliding_sigma_tol for a full sliding_window
- SLIDING_EXIT     : |sigma| back above the tolerance for a full step

The gain is held over each step (zero-order hold) and the active interval
follows the hysteretic switching rule of synthesis.select_interval.
Trajectories export to CSV (t, states, gamma, sigma) plus a JSON event log.
"""
import json
import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd

import linalg
from synthesis import (
    DEFAULT_HYSTERESIS_BAND,
    Controller,
    GainIntervals,
    GainSelector,
    Interval,
    Plant,
    select_interval,
    switching_sigma,
)

logger = logging.getLogger(__name__)

# -------------------------
# Configuration
# -------------------------
DEFAULT_DT = 1e-3
DIVERGENCE_LIMIT = 1e100
SIGMA_TOL_FACTOR = 10.0       # sliding_sigma_tol = 10 * hysteresis_band
WINDOW_STEPS = 50             # sliding_window = 50 * dt
CROSSING_SIGMA_RATIO = 1e-3
FIT_FLOOR = 1e-14
FLOAT_FORMAT = "%.17g"


class EventKind(str, Enum):
    SURFACE_CROSSING = "SURFACE_CROSSING"
    SLIDING_ONSET = "SLIDING_ONSET"
    SLIDING_EXIT = "SLIDING_EXIT"


@dataclass(frozen=True, eq=False)
class Event:
    kind: EventKind
    time: float
    state: np.ndarray
    direction: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "time": float(self.time),
            "state": [float(v) for v in self.state],
            "direction": int(self.direction),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(EventKind(d["kind"]), float(d["time"]),
                   np.asarray(d["state"], dtype=float), int(d.get("direction", 0)))


@dataclass
class SimConfig:
    t_end: float
    dt: float = DEFAULT_DT
    event_tol: Optional[float] = None
    hysteresis_band: Optional[float] = None
    sliding_window: Optional[float] = None
    sliding_sigma_tol: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > self.dt:
            raise ValueError(f"t_end must exceed dt, got t_end={self.t_end}, dt={self.dt}")
        if self.event_tol is not None and not 0 < self.event_tol <= self.dt:
            raise ValueError(f"event_tol must lie in (0, dt], got {self.event_tol}")
        if self.hysteresis_band is not None and self.hysteresis_band < 0:
            raise ValueError(f"hysteresis_band must be >= 0, got {self.hysteresis_band}")
        if self.sliding_window is not None and self.sliding_window < self.dt:
            raise ValueError(f"sliding_window must be >= dt, got {self.sliding_window}")
        if self.sliding_sigma_tol is not None and self.sliding_sigma_tol < 0:
            raise ValueError(f"sliding_sigma_tol must be >= 0, got {self.sliding_sigma_tol}")

    def resolved(self, band_fallback: float = DEFAULT_HYSTERESIS_BAND) -> "SimConfig":
        """Copy with every optional field filled from the documented defaults."""
        band = self.hysteresis_band if self.hysteresis_band is not None else band_fallback
        return replace(
            self,
            event_tol=self.event_tol if self.event_tol is not None else self.dt * 1e-3,
            hysteresis_band=band,
            sliding_window=self.sliding_window if self.sliding_window is not None else WINDOW_STEPS * self.dt,
            sliding_sigma_tol=(self.sliding_sigma_tol if self.sliding_sigma_tol is not None
                               else SIGMA_TOL_FACTOR * band),
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("t_end", "dt", "event_tol", "hysteresis_band", "sliding_window", "sliding_sigma_tol")}


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    gamma_trace: np.ndarray
    sigma_trace: np.ndarray
    events: List[Event] = field(default_factory=list)
    intervals: List[str] = field(default_factory=list)
    diagnostic: Optional[str] = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def truncated(self) -> bool:
        return self.diagnostic is not None

    def events_of(self, kind: EventKind) -> List[Event]:
        return [e for e in self.events if e.kind == kind]

    def first_onset(self) -> Optional[Event]:
        onsets = self.events_of(EventKind.SLIDING_ONSET)
        return onsets[0] if onsets else None

    def crossings_before_onset(self) -> List[Event]:
        onset = self.first_onset()
        limit = onset.time if onset is not None else np.inf
        return [e for e in self.events_of(EventKind.SURFACE_CROSSING) if e.time < limit]

    def sliding_intervals(self) -> List[Tuple[float, float]]:
        spans, start = [], None
        for e in self.events:
            if e.kind == EventKind.SLIDING_ONSET:
                start = e.time
            elif e.kind == EventKind.SLIDING_EXIT and start is not None:
                spans.append((start, e.time))
                start = None
        if start is not None:
            spans.append((start, float(self.times[-1])))
        return spans


class SwitchingLaw(Protocol):
    """What the integrator needs from a feedback law."""

    def sigma(self, x: np.ndarray) -> float: ...

    def level(self, which: Interval, x: np.ndarray) -> float: ...

    def reported_gain(self, x: np.ndarray, level: float) -> float: ...


Rhs = Callable[[np.ndarray, float], np.ndarray]


class LinearSwitchingLaw:
    """sigma from the controller, gamma drawn by the selector inside the active interval."""

    def __init__(self, ctrl: Controller, selector: GainSelector, gains: GainIntervals):
        self.ctrl = ctrl
        self.selector = selector
        self.gains = gains

    def sigma(self, x):
        return switching_sigma(self.ctrl, x)

    def level(self, which, x):
        return self.selector.draw(self.gains, which)

    def reported_gain(self, x, level):
        return level


# -------------------------
# integration core
# -------------------------
def _rk4_step(rhs: Rhs, x: np.ndarray, level: float, h: float) -> np.ndarray:
    k1 = rhs(x, level)
    k2 = rhs(x + 0.5 * h * k1, level)
    k3 = rhs(x + 0.5 * h * k2, level)
    k4 = rhs(x + h * k3, level)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _locate_crossing(rhs: Rhs, law: SwitchingLaw, x: np.ndarray, t: float, level: float,
                     dt: float, s0: float, s1: float, x1: np.ndarray, tol: float) -> Event:
    """Bisect the step [t, t+dt] for the zero of sigma; sub-steps restart from x."""
    lo, hi = 0.0, dt
    best_h, best_x, best_s = dt, x1, s1
    target = abs(s0) * CROSSING_SIGMA_RATIO
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        xm = _rk4_step(rhs, x, level, mid)
        sm = law.sigma(xm)
        if abs(sm) < abs(best_s):
            best_h, best_x, best_s = mid, xm, sm
        if abs(sm) <= target:
            break
        if sm * s0 > 0:
            lo = mid
        else:
            hi = mid
    return Event(EventKind.SURFACE_CROSSING, t + best_h, best_x, int(np.sign(s1)))


class _SlidingDetector:
    """Dwell-time classification of sliding on the sampled sigma."""

    def __init__(self, sigma_tol: float, window: float, dt: float):
        self.sigma_tol = sigma_tol
        self.window = window
        self.slack = 1e-9 * dt
        self.sliding = False
        self._entry: Optional[Tuple[float, np.ndarray]] = None
        self._outside: Optional[Tuple[float, np.ndarray]] = None

    def update(self, t: float, x: np.ndarray, sigma: float) -> Optional[Event]:
        inside = abs(sigma) <= self.sigma_tol
        if not self.sliding:
            if not inside:
                self._entry = None
                return None
            if self._entry is None:
                self._entry = (t, x)
            if t - self._entry[0] >= self.window - self.slack:
                self.sliding = True
                self._outside = None
                t0, x0 = self._entry
                return Event(EventKind.SLIDING_ONSET, t0, x0)
            return None

        if inside:
            self._outside = None
            return None
        if self._outside is None:
            self._outside = (t, x)
            return None
        # second consecutive sample outside: a full step spent off the band
        self.sliding = False
        self._entry = None
        t0, x0 = self._outside
        self._outside = None
        return Event(EventKind.SLIDING_EXIT, t0, x0)


def _run(rhs: Rhs, law: SwitchingLaw, x0, cfg: SimConfig,
         validity: Optional[Callable[[np.ndarray], Optional[str]]] = None) -> Trajectory:
    x = linalg.as_vector(x0, name="x0")
    dt = cfg.dt
    band = cfg.hysteresis_band
    n_steps = int(np.floor(cfg.t_end / dt + 1e-9))

    times = [0.0]
    states = [x]
    sigma = law.sigma(x)
    which = select_interval(sigma, None, band)
    level = law.level(which, x)
    gammas = [law.reported_gain(x, level)]
    sigmas = [sigma]
    intervals = [which.value]
    events: List[Event] = []
    detector = _SlidingDetector(cfg.sliding_sigma_tol, cfg.sliding_window, dt)
    detector.update(0.0, x, sigma)
    diagnostic = None

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            t = (k - 1) * dt
            t_new = k * dt
            x_new = _rk4_step(rhs, x, level, dt)

            if not np.all(np.isfinite(x_new)) or float(np.max(np.abs(x_new))) > DIVERGENCE_LIMIT:
                diagnostic = f"non-finite state at t={t_new:.6g} (divergence)"
                break
            if validity is not None:
                problem = validity(x_new)
                if problem:
                    diagnostic = f"{problem} at t={t_new:.6g}"
                    break

            sigma_new = law.sigma(x_new)
            if not detector.sliding:
                if sigma * sigma_new < 0:
                    events.append(_locate_crossing(rhs, law, x, t, level, dt, sigma, sigma_new,
                                                   x_new, cfg.event_tol))
                elif sigma == 0.0 and sigma_new != 0.0 and k > 1 and sigmas[-2] * sigma_new < 0:
                    events.append(Event(EventKind.SURFACE_CROSSING, t, x, int(np.sign(sigma_new))))

            ev = detector.update(t_new, x_new, sigma_new)
            if ev is not None:
                if ev.kind == EventKind.SLIDING_ONSET:
                    # chatter inside the band before the dwell completed is not a crossing
                    events = [e for e in events
                              if not (e.kind == EventKind.SURFACE_CROSSING and e.time >= ev.time)]
                    logger.debug("sliding onset at t=%.6g", ev.time)
                else:
                    logger.debug("sliding exit at t=%.6g", ev.time)
                events.append(ev)

            x, sigma = x_new, sigma_new
            which = select_interval(sigma, which, band)
            level = law.level(which, x)
            times.append(t_new)
            states.append(x)
            gammas.append(law.reported_gain(x, level))
            sigmas.append(sigma)
            intervals.append(which.value)

    if diagnostic:
        logger.warning("simulation truncated: %s", diagnostic)
    events.sort(key=lambda e: e.time)
    return Trajectory(
        times=np.asarray(times),
        states=np.vstack(states),
        gamma_trace=np.asarray(gammas, dtype=float),
        sigma_trace=np.asarray(sigmas, dtype=float),
        events=events,
        intervals=intervals,
        diagnostic=diagnostic,
    )


# -------------------------
# public simulators
# -------------------------
def simulate_switched_linear(plant: Plant, ctrl: Controller, selector: GainSelector, x0,
                             cfg: SimConfig) -> Trajectory:
    """x' = (F + g H gamma) x with gamma from the selector on the hysteretic switching rule."""
    if ctrl.gains is None:
        raise ValueError("controller carries no gain intervals")
    x0 = linalg.as_vector(x0, plant.n, "x0")
    cfg = cfg.resolved(ctrl.hysteresis_band)
    selector.reset()
    gH = np.outer(plant.g, plant.H)
    F = plant.F

    def rhs(x, gamma):
        return F @ x + gamma * (gH @ x)

    law = LinearSwitchingLaw(ctrl, selector, ctrl.gains)
    traj = _run(rhs, law, x0, cfg)
    logger.info("linear run: %d samples, %d events", len(traj.times), len(traj.events))
    return traj


def simulate_nonlinear(rhs: Rhs, law: SwitchingLaw, x0, cfg: SimConfig,
                       validity: Optional[Callable[[np.ndarray], Optional[str]]] = None) -> Trajectory:
    """Same machinery for any rhs(x, level); the law supplies sigma and the level per interval."""
    return _run(rhs, law, x0, cfg.resolved(), validity)


def simulate_forced_linear(F, g, u: Callable[[float], float], x0, cfg: SimConfig) -> Trajectory:
    """x' = F x + g u(t) with RK4; gamma_trace carries u, sigma_trace is zero."""
    A = linalg.as_square(F, "F")
    gv = linalg.as_vector(g, A.shape[0], "g")
    x = linalg.as_vector(x0, A.shape[0], "x0")
    dt = cfg.dt
    n_steps = int(np.floor(cfg.t_end / dt + 1e-9))

    def f(t, s):
        return A @ s + gv * u(t)

    times, states, inputs = [0.0], [x], [u(0.0)]
    diagnostic = None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            t = (k - 1) * dt
            k1 = f(t, x)
            k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
            k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
            k4 = f(t + dt, x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)) or float(np.max(np.abs(x))) > DIVERGENCE_LIMIT:
                diagnostic = f"non-finite state at t={k * dt:.6g} (divergence)"
                logger.warning("simulation truncated: %s", diagnostic)
                break
            times.append(k * dt)
            states.append(x)
            inputs.append(u(k * dt))
    return Trajectory(
        times=np.asarray(times),
        states=np.vstack(states),
        gamma_trace=np.asarray(inputs, dtype=float),
        sigma_trace=np.zeros(len(times)),
        diagnostic=diagnostic,
    )


# -------------------------
# post-processing
# -------------------------
def fit_sliding_decay(traj: Trajectory, setpoint_component: int, setpoint: float,
                      floor: float = FIT_FLOOR, rel_floor: float = 1e-2) -> float:
    """Decay rate of |x_i - setpoint| over the first sliding interval.

    Least-squares slope of the log deviation, using samples from the onset
    until the deviation first drops below max(floor, rel_floor * deviation
    at onset).
    """
    spans = traj.sliding_intervals()
    if not spans:
        raise ValueError("trajectory has no sliding interval")
    t0, t1 = spans[0]
    dt = traj.dt
    if t1 - t0 < 10 * dt:
        raise ValueError(f"sliding interval [{t0:.6g}, {t1:.6g}] shorter than 10*dt")

    mask = (traj.times >= t0 - 0.5 * dt) & (traj.times <= t1 + 0.5 * dt)
    t = traj.times[mask]
    dev = np.abs(traj.states[mask, setpoint_component] - setpoint)
    cutoff = max(floor, rel_floor * float(dev[0]))
    below = np.nonzero(dev <= cutoff)[0]
    stop = int(below[0]) if below.size else len(dev)
    if stop < 2:
        raise ValueError("component pinned at the setpoint, nothing to fit")
    slope, _ = np.polyfit(t[:stop], np.log(dev[:stop]), 1)
    return float(-slope)


def crossing_sequence(traj: Trajectory, component: int = -1,
                      split_at: Optional[float] = None) -> Tuple[List[float], List[float]]:
    """Component values at the surface crossings before the first sliding onset.

    Hits below split_at (default: final value of the component, i.e. the
    setpoint the loop converges to) go to lower_hits, the rest to upper_hits.
    """
    if split_at is None:
        split_at = float(traj.states[-1, component])
    lower, upper = [], []
    for e in traj.crossings_before_onset():
        v = float(e.state[component])
        (lower if v < split_at else upper).append(v)
    return lower, upper


# -------------------------
# CSV / JSON export
# -------------------------
def trajectory_frame(traj: Trajectory, names: Optional[Sequence[str]] = None) -> pd.DataFrame:
    n = traj.states.shape[1]
    cols = list(names) if names else [f"x{i + 1}" for i in range(n)]
    if len(cols) != n:
        raise ValueError(f"expected {n} column names, got {cols}")
    df = pd.DataFrame(traj.states, columns=cols)
    df.insert(0, "t", traj.times)
    df["gamma"] = traj.gamma_trace
    df["sigma"] = traj.sigma_trace
    return df


def write_trajectory(traj: Trajectory, path: str, names: Optional[Sequence[str]] = None,
                     fmt: str = "csv") -> Tuple[str, str]:
    """Write <path> (CSV, or pandas 'split' JSON) and <stem>.events.json; returns both paths."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown trajectory format '{fmt}', expected csv or json")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    df = trajectory_frame(traj, names)
    if fmt == "csv":
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    else:
        df.to_json(path, orient="split", index=False, double_precision=15)
    events_path = os.path.splitext(path)[0] + ".events.json"
    payload = {"events": [e.to_dict() for e in traj.events], "diagnostic": traj.diagnostic}
    with open(events_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return path, events_path


def read_trajectory(path: str) -> Tuple[Trajectory, List[str]]:
    if path.endswith(".json"):
        df = pd.read_json(path, orient="split", precise_float=True)
    else:
        df = pd.read_csv(path, float_precision="round_trip")
    required = ["t", "gamma", "sigma"]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise ValueError(f"trajectory CSV missing required columns: {missing} — found: {list(df.columns)}")
    names = [c for c in df.columns if c not in required]
    events, diagnostic = [], None
    events_path = os.path.splitext(path)[0] + ".events.json"
    if os.path.exists(events_path):
        with open(events_path, encoding="utf-8") as fh:
            payload = json.load(fh)
        events = [Event.from_dict(d) for d in payload.get("events", [])]
        diagnostic = payload.get("diagnostic")
    traj = Trajectory(
        times=df["t"].to_numpy(dtype=float),
        states=df[names].to_numpy(dtype=float),
        gamma_trace=df["gamma"].to_numpy(dtype=float),
        sigma_trace=df["sigma"].to_numpy(dtype=float),
        events=events,
        diagnostic=diagnostic,
    )
    return traj, names
