import numpy as np
import pytest
from numpy.testing import assert_allclose

import linalg
import sim
from linalg import Poly
from sim import Event, EventKind, SimConfig, Trajectory
from synthesis import (
    Controller,
    GainIntervals,
    GainSelector,
    Plant,
    SelectionPolicy,
    SynthesisError,
    check_feasibility,
    compute_K,
    compute_x_eq,
    switching_sigma,
    synthesize,
)

I0 = 1e-3


def _seir_controller(plant, gains, lam=1.0, band=1e-6):
    ctrl, report = synthesize(plant, gains, Poly((lam, 1.0)), I0, hysteresis_band=band)
    assert report.feasible
    return ctrl


def _on_line(lam, offset, delta=0.2, eps=0.2):
    """Point of the SEIR sliding line with I = I0 + offset."""
    m = (lam - delta) / eps
    return np.array([delta / eps * I0 - m * offset, I0 + offset])


# -------------------------
# SimConfig
# -------------------------
def test_sim_config_validation():
    with pytest.raises(ValueError, match="dt"):
        SimConfig(t_end=1.0, dt=0.0)
    with pytest.raises(ValueError, match="t_end"):
        SimConfig(t_end=1e-3, dt=1e-3)
    with pytest.raises(ValueError, match="event_tol"):
        SimConfig(t_end=1.0, dt=1e-3, event_tol=1e-2)
    with pytest.raises(ValueError, match="sliding_window"):
        SimConfig(t_end=1.0, dt=1e-3, sliding_window=1e-4)


def test_sim_config_defaults():
    cfg = SimConfig(t_end=1.0, dt=1e-3).resolved(2e-6)
    assert cfg.event_tol == pytest.approx(1e-6)
    assert cfg.hysteresis_band == 2e-6
    assert cfg.sliding_sigma_tol == pytest.approx(2e-5)
    assert cfg.sliding_window == pytest.approx(0.05)


# -------------------------
# switched linear loop
# -------------------------
def test_equilibrium_start_stays_put(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), ctrl.x_eq, SimConfig(t_end=2.0))
    assert traj.events_of(EventKind.SURFACE_CROSSING) == []
    assert np.max(np.linalg.norm(traj.states - ctrl.x_eq, axis=1)) < 1e-5
    assert len(traj.times) == len(traj.states) == len(traj.gamma_trace) == len(traj.sigma_trace)
    assert np.all(np.diff(traj.times) > 0)


def test_i_axis_start_slides_to_equilibrium(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 2e-3],
                                        SimConfig(t_end=30.0))
    onset = traj.first_onset()
    assert onset is not None
    assert 2.0 < onset.time < 6.0
    assert np.linalg.norm(traj.states[-1] - ctrl.x_eq) < 1e-5
    assert traj.diagnostic is None


@pytest.mark.parametrize("lam", [1.0, 0.5])
def test_sliding_decay_matches_delta(seir_plant, seir_gains, lam):
    ctrl = _seir_controller(seir_plant, seir_gains, lam=lam, band=1e-7)
    offset = 1.5e-4
    x0 = _on_line(lam, offset)
    assert abs(switching_sigma(ctrl, x0)) < 1e-15
    t_end = 6.0 if lam == 1.0 else 12.0
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), x0, SimConfig(t_end=t_end, dt=1e-4))
    rate = sim.fit_sliding_decay(traj, setpoint_component=1, setpoint=I0, floor=2e-2 * offset)
    assert rate == pytest.approx(lam, rel=0.02)


def test_onset_time_stable_under_step_halving(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    onsets = []
    for dt in (2e-3, 1e-3):
        traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 2e-3],
                                            SimConfig(t_end=10.0, dt=dt))
        onsets.append(traj.first_onset().time)
    assert abs(onsets[0] - onsets[1]) < 2 * 2e-3


def test_onset_time_converges_as_band_shrinks(seir_plant, seir_gains):
    onsets = []
    for band in (1e-6, 1e-7):
        ctrl = _seir_controller(seir_plant, seir_gains, band=band)
        traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 2e-3],
                                            SimConfig(t_end=10.0))
        onsets.append(traj.first_onset().time)
    assert abs(onsets[0] - onsets[1]) < 0.05 * onsets[1]


def test_crossings_are_bracketed_and_ordered(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    cfg = SimConfig(t_end=60.0, dt=1e-3, sliding_window=0.2)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 5e-4], cfg)
    crossings = traj.crossings_before_onset()
    assert len(crossings) >= 1
    assert traj.first_onset() is not None
    times = [e.time for e in traj.events]
    assert times == sorted(times)
    for e in crossings:
        assert e.direction in (-1, 1)
        k = int(np.searchsorted(traj.times, e.time - 1e-12)) - 1
        assert traj.times[k] < e.time <= traj.times[k + 1] + 1e-12
        assert traj.sigma_trace[k] * traj.sigma_trace[k + 1] < 0
        assert abs(switching_sigma(ctrl, e.state)) <= max(abs(traj.sigma_trace[k]), abs(traj.sigma_trace[k + 1]))
    assert traj.crossings_before_onset()[0].state[1] < I0


def test_random_selector_runs_are_bitwise_reproducible(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    cfg = SimConfig(t_end=5.0)
    runs = [sim.simulate_switched_linear(seir_plant, ctrl,
                                         GainSelector(SelectionPolicy.RANDOM_UNIFORM, seed=3),
                                         [0.0, 2e-3], cfg) for _ in range(2)]
    assert np.array_equal(runs[0].states, runs[1].states)
    assert np.array_equal(runs[0].gamma_trace, runs[1].gamma_trace)
    assert [e.time for e in runs[0].events] == [e.time for e in runs[1].events]


def test_divergence_truncates_with_diagnostic():
    plant = Plant(F=[[1.0]], g=[1.0], H=[1.0])
    ctrl = Controller(K=[1.0], x_eq=[1.0], gamma0=0.15, sign_h_xeq=1.0, delta_poly=Poly((1.0,)),
                      gains=GainIntervals(0.0, 0.1, 0.2, 0.3))
    traj = sim.simulate_switched_linear(plant, ctrl, GainSelector(), [1.0], SimConfig(t_end=400.0, dt=0.1))
    assert traj.truncated
    assert "divergence" in traj.diagnostic
    assert traj.times[-1] < 400.0
    assert np.all(np.isfinite(traj.states))


def test_controller_without_gains_is_rejected(seir_plant):
    ctrl = Controller(K=[-1.0, -4.0], x_eq=[I0, I0], gamma0=0.2, sign_h_xeq=1.0, delta_poly=Poly((1.0, 1.0)))
    with pytest.raises(ValueError, match="gain intervals"):
        sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 0.0], SimConfig(t_end=1.0))


# -------------------------
# forced linear runs
# -------------------------
def test_forced_linear_constant_input_reaches_steady_state():
    F = -np.eye(2)
    traj = sim.simulate_forced_linear(F, [1.0, 0.0], lambda t: 2.0, [0.0, 0.0], SimConfig(t_end=20.0, dt=1e-2))
    assert_allclose(traj.states[-1], [2.0, 0.0], atol=1e-6)
    assert np.all(traj.gamma_trace == 2.0)
    assert np.all(traj.sigma_trace == 0.0)


# -------------------------
# post-processing
# -------------------------
def _synthetic(rate, setpoint=0.0, onset=True):
    times = np.arange(0.0, 10.0 + 1e-12, 0.01)
    dev = np.exp(-rate * times)
    states = np.column_stack([np.zeros_like(times), setpoint + dev])
    events = [Event(EventKind.SLIDING_ONSET, 0.0, states[0])] if onset else []
    return Trajectory(times, states, np.zeros_like(times), np.zeros_like(times), events)


def test_fit_recovers_exact_exponential():
    assert sim.fit_sliding_decay(_synthetic(0.7), 1, 0.0) == pytest.approx(0.7, rel=1e-10)


def test_fit_needs_sliding_interval():
    with pytest.raises(ValueError, match="no sliding"):
        sim.fit_sliding_decay(_synthetic(0.7, onset=False), 1, 0.0)
    traj = _synthetic(0.7)
    traj.events.append(Event(EventKind.SLIDING_EXIT, 0.05, traj.states[5]))
    with pytest.raises(ValueError, match="shorter"):
        sim.fit_sliding_decay(traj, 1, 0.0)


def test_crossing_sequence_empty_when_sliding_from_start(seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), _on_line(1.0, 1e-4),
                                        SimConfig(t_end=3.0))
    assert traj.first_onset().time == 0.0
    assert sim.crossing_sequence(traj) == ([], [])


def test_crossing_sequence_splits_at_value():
    s = np.zeros(2)
    events = [
        Event(EventKind.SURFACE_CROSSING, 1.0, np.array([0.0, 0.8]), 1),
        Event(EventKind.SURFACE_CROSSING, 2.0, np.array([0.0, 1.3]), -1),
        Event(EventKind.SURFACE_CROSSING, 3.0, np.array([0.0, 0.9]), 1),
        Event(EventKind.SLIDING_ONSET, 4.0, s),
        Event(EventKind.SURFACE_CROSSING, 5.0, np.array([0.0, 0.95]), 1),
    ]
    times = np.linspace(0.0, 6.0, 7)
    traj = Trajectory(times, np.tile([0.0, 1.0], (7, 1)), np.zeros(7), np.zeros(7), events)
    assert sim.crossing_sequence(traj) == ([0.8, 0.9], [1.3])
    assert sim.crossing_sequence(traj, split_at=0.85) == ([0.8], [1.3, 0.9])


# -------------------------
# export
# -------------------------
def test_csv_round_trip_is_exact(tmp_path, seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), [0.0, 2e-3], SimConfig(t_end=6.0))
    csv_path, events_path = sim.write_trajectory(traj, str(tmp_path / "run.csv"), names=["E", "I"])
    assert events_path.endswith("run.events.json")
    with open(csv_path, encoding="utf-8") as fh:
        assert fh.readline().strip() == "t,E,I,gamma,sigma"

    back, names = sim.read_trajectory(csv_path)
    assert names == ["E", "I"]
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.states, traj.states)
    assert np.array_equal(back.sigma_trace, traj.sigma_trace)
    assert [(e.kind, e.time) for e in back.events] == [(e.kind, e.time) for e in traj.events]


def test_json_trajectory_format(tmp_path, seir_plant, seir_gains):
    ctrl = _seir_controller(seir_plant, seir_gains)
    traj = sim.simulate_switched_linear(seir_plant, ctrl, GainSelector(), ctrl.x_eq, SimConfig(t_end=0.5))
    path, _ = sim.write_trajectory(traj, str(tmp_path / "run.json"), fmt="json")
    back, names = sim.read_trajectory(path)
    assert names == ["x1", "x2"]
    # 15 decimal places
    assert_allclose(back.states, traj.states, rtol=1e-9, atol=1e-15)
    with pytest.raises(ValueError, match="format"):
        sim.write_trajectory(traj, str(tmp_path / "run.txt"), fmt="txt")


def test_read_trajectory_requires_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x1\n0,1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="missing required columns"):
        sim.read_trajectory(str(path))


# -------------------------
# gains that do not bracket the equilibrium gain
# -------------------------
@pytest.mark.slow
def test_unbracketed_gains_never_settle_at_equilibrium(rng):
    """Both intervals below gamma*: x_eq is no rest point of the switched loop."""
    settled, sliding, runs = [], [], 0
    while runs < 100:
        plant = Plant(F=rng.normal(size=(2, 2)), g=rng.normal(size=2), H=rng.normal(size=2))
        d0 = linalg.det(plant.F)
        slope = linalg.det(plant.closed_loop(1.0)) - d0
        if abs(slope) < 1e-2:
            continue
        g_star = -d0 / slope
        gains = GainIntervals(g_star - 3.0, g_star - 2.0, g_star - 1.5, g_star - 0.5)
        assert not check_feasibility(plant, gains).feasible
        try:
            x_eq = compute_x_eq(plant, g_star, 1.0)
            K = compute_K(plant, Poly((1.0, 1.0)))
        except (SynthesisError, linalg.RankError):
            continue
        ctrl = Controller(K=K, x_eq=x_eq, gamma0=g_star, sign_h_xeq=1.0 if plant.H @ x_eq >= 0 else -1.0,
                          delta_poly=Poly((1.0, 1.0)), gains=gains)
        x0 = x_eq + 0.5 * np.linalg.norm(x_eq) * rng.normal(size=2)
        traj = sim.simulate_switched_linear(plant, ctrl, GainSelector(), x0, SimConfig(t_end=50.0, dt=1e-2))
        if traj.first_onset() is not None:
            sliding.append(runs)
        if np.linalg.norm(traj.states[-1] - x_eq) < 0.05 * np.linalg.norm(x_eq) and not traj.truncated:
            settled.append(runs)
        runs += 1
    assert len(settled) <= 5, (f"runs settled at x_eq: {settled}; "
                               f"sliding onset in {len(sliding)}/{runs} runs: {sliding}")


@pytest.mark.slow
def test_uncontrollable_plants_never_settle_at_equilibrium(rng):
    """g spans an F-invariant line: the other mode is untouched by the switching."""
    settled, sliding, runs = [], [], 0
    while runs < 50:
        f11, f12 = rng.normal(size=2)
        f22 = rng.uniform(0.2, 1.0)
        g1, h1, h2 = rng.normal(size=3)
        if abs(g1 * h1) < 1e-1:
            continue
        plant = Plant(F=np.array([[f11, f12], [0.0, f22]]), g=np.array([g1, 0.0]), H=np.array([h1, h2]))
        g_star = -f11 / (g1 * h1)
        gains = GainIntervals(g_star - 2.0, g_star - 1.0, g_star + 1.0, g_star + 2.0)
        report = check_feasibility(plant, gains)
        assert not report.controllable and not report.feasible
        with pytest.raises((SynthesisError, linalg.RankError)):
            compute_K(plant, Poly((1.0, 1.0)))

        x_eq = np.array([1.0, 0.0])
        assert_allclose(plant.closed_loop(g_star) @ x_eq, 0.0, atol=1e-12)
        K = np.array([1.0, rng.normal()])
        ctrl = Controller(K=K, x_eq=x_eq, gamma0=g_star, sign_h_xeq=1.0 if h1 >= 0 else -1.0,
                          delta_poly=Poly((1.0, 1.0)), gains=gains)
        x0 = x_eq + 0.5 * rng.normal(size=2)
        traj = sim.simulate_switched_linear(plant, ctrl, GainSelector(), x0, SimConfig(t_end=50.0, dt=1e-2))
        if traj.first_onset() is not None:
            sliding.append(runs)
        if np.linalg.norm(traj.states[-1] - x_eq) < 0.05 and not traj.truncated:
            settled.append(runs)
        runs += 1
    assert settled == [], (f"runs settled at x_eq: {settled}; "
                           f"sliding onset in {len(sliding)}/{runs} runs: {sliding}")
