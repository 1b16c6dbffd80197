import math

import numpy as np
import pytest

from ada.predicates import (ConfigValid, ObstacleBehaviour, SafeSetpointRule, SeparationBound,
                            StateErrorBound, TrackingBound)
from ada.sbt.monitors import (HELD, NOT_APPLICABLE, VIOLATED, ClauseMonitor, MonitorError,
                              atom_robustness, build_monitors)
from ada.sim.mpcs import MpcsConfig
from ada.sim.params import ScenarioParams
from ada.sim.scenario import Trace, run_scenario

from .oracles import plan_slack_oracle, wrapped_gap
from .test_scenario import SHORT

TWO_PI = 2 * math.pi


def random_trace(rng, n=401, m=2):
    """Signals with no physics behind them: only the monitors' arithmetic is under test."""
    params = ScenarioParams(duration=(n - 1) * 0.1)
    own_truth = np.column_stack([rng.normal(0, 50, n), rng.uniform(0, 1000, n),
                                 rng.uniform(0, 3, n), rng.uniform(0, TWO_PI, n),
                                 rng.uniform(0, TWO_PI, n)])
    own_belief = own_truth + rng.normal(0, 0.3, (n, 5))
    own_belief[:, 3:] %= TWO_PI
    obs_truth = np.stack([own_truth + rng.normal(0, 200, (n, 5)) for _ in range(m)])
    obs_truth[..., 2] = np.abs(obs_truth[..., 2]) % 6
    obs_truth[..., 3:] %= TWO_PI
    if m and rng.random() < 0.5:
        # constant-velocity obstacle for the behaviour monitor
        obs_truth[0, :, 2] = obs_truth[0, 0, 2]
        obs_truth[0, :, 4] = obs_truth[0, 0, 4]
    obs_belief = obs_truth + rng.normal(0, 1.5, (m, n, 5))
    obs_belief[..., 3:] %= TWO_PI
    dims_truth = rng.uniform(5, 30, (m, 2))
    dims_belief = dims_truth[:, None, :] + rng.normal(0, 0.5, (m, n, 2))
    # commands held for long random stretches so some ticks count as settled
    cmd = np.repeat(rng.choice([0.0, 1.5, 3.0], n // 50 + 1), 50)[:n]
    return Trace(params, "nominal", {
        "t": np.arange(n) * 0.1,
        "own.truth": own_truth,
        "own.belief": own_belief,
        "own.progress": own_truth[:, 1],
        "own.cross_track": rng.normal(0, 0.6, n),
        "own.arrived": np.arange(n) > n - 20,
        "cmd": cmd,
        "decision": np.arange(n) % 10 == 0,
        "plan_slack": np.full(n, math.nan),
        "obstacles.truth": obs_truth,
        "obstacles.belief": obs_belief,
        "obstacles.dims_belief": dims_belief,
        "obstacles.dims_truth": dims_truth,
    })


def brute_state_error(trace, atom):
    s = trace.signals
    if atom.subject == "own":
        pairs = [(s["own.truth"], s["own.belief"], None, None)]
    else:
        pairs = [(s["obstacles.truth"][i], s["obstacles.belief"][i],
                  s["obstacles.dims_truth"][i], s["obstacles.dims_belief"][i])
                 for i in range(trace.n_obstacles)]
    out = []
    for k in range(trace.n_ticks):
        worst = -math.inf
        for truth, est, dims, est_dims in pairs:
            if atom.signal == "position_m":
                err = math.dist(truth[k, :2], est[k, :2])
            elif atom.signal == "speed_mps":
                err = abs(truth[k, 2] - est[k, 2])
            elif atom.signal == "heading_rad":
                err = wrapped_gap(truth[k, 3], est[k, 3])
            elif atom.signal == "course_rad":
                err = wrapped_gap(truth[k, 4], est[k, 4])
            else:
                err = max(abs(dims[0] - est_dims[k, 0]), abs(dims[1] - est_dims[k, 1]))
            worst = max(worst, err)
        out.append(atom.epsilon - worst)
    return np.array(out)


def brute_tracking(trace, atom):
    s = trace.signals
    window = int(round(atom.settle_time / trace.params.dt))
    cmd = s["cmd"]
    out = []
    for k in range(trace.n_ticks):
        r = atom.eps_pos - abs(s["own.cross_track"][k])
        held = k >= window and len(set(cmd[k - window:k])) == 1
        if held and not s["own.arrived"][k]:
            r = min(r, atom.eps_speed - abs(s["own.truth"][k, 2] - cmd[k - 1]))
        out.append(r)
    return np.array(out)


def brute_behaviour(trace, atom):
    truth = trace.signals["obstacles.truth"]
    dt = trace.params.dt
    out = []
    for k in range(trace.n_ticks):
        r = math.inf
        for i in range(trace.n_obstacles):
            speed = truth[i, k, 2]
            r = min(r, atom.max_speed - speed, -abs(speed - truth[i, 0, 2]))
            rate = 0.0 if k == 0 else wrapped_gap(truth[i, k, 4], truth[i, k - 1, 4]) / dt
            r = min(r, atom.max_turn_rate - rate)
        out.append(r)
    return np.array(out)


def brute_separation(trace, atom):
    s = trace.signals
    out = []
    for k in range(trace.n_ticks):
        sep = min(math.dist(s["own.truth"][k, :2], s["obstacles.truth"][i, k, :2])
                  - 0.5 * math.hypot(*s["obstacles.dims_truth"][i])
                  for i in range(trace.n_obstacles))
        out.append(sep - atom.d_min)
    return np.array(out)


ATOMS = [
    (StateErrorBound("position_m", "own", 0.5), brute_state_error),
    (StateErrorBound("speed_mps", "own", 0.3), brute_state_error),
    (StateErrorBound("heading_rad", "own", 0.4), brute_state_error),
    (StateErrorBound("course_rad", "obstacle", 2.0), brute_state_error),
    (StateErrorBound("position_m", "obstacle", 3.0), brute_state_error),
    (StateErrorBound("dimensions_m", "obstacle", 1.0), brute_state_error),
    (TrackingBound(1.0, 0.2, 2.0), brute_tracking),
    (ObstacleBehaviour("constant_velocity", 5.0, 0.0), brute_behaviour),
    (SeparationBound(30.0), brute_separation),
]


@pytest.mark.parametrize("case", range(len(ATOMS)),
                         ids=[f"{type(a).__name__}-{i}" for i, (a, _) in enumerate(ATOMS)])
def test_monitor_matches_per_tick_loop(case):
    atom, brute = ATOMS[case]
    rng = np.random.default_rng(100 + case)
    statuses = set()
    for _ in range(100):
        trace = random_trace(rng)
        got = atom_robustness(trace, atom)
        want = brute(trace, atom)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)
        statuses.add(ClauseMonitor("X", "guarantee", (atom,)).evaluate(trace).status)
    assert VIOLATED in statuses


def test_tracking_is_checked_on_some_settled_ticks():
    trace = random_trace(np.random.default_rng(0))
    rob = atom_robustness(trace, TrackingBound(100.0, 0.2, 2.0))
    assert (rob < 99).any()


def test_config_monitor():
    trace = random_trace(np.random.default_rng(1), n=5)
    assert (atom_robustness(trace, ConfigValid("crossing-1", 30.0)) == 0).all()
    assert (atom_robustness(trace, ConfigValid("other", 30.0)) < 0).all()
    assert (atom_robustness(trace, ConfigValid("crossing-1", 25.0)) < 0).all()


@pytest.fixture(scope="module")
def real_trace():
    return run_scenario(SHORT)


def test_safe_setpoint_matches_oracle_at_decision_ticks(real_trace):
    rob = atom_robustness(real_trace, SafeSetpointRule(SHORT.horizon))
    decision = real_trace.signal("decision")
    assert np.isnan(rob[~decision]).all()
    p = SHORT
    cfg = MpcsConfig(p.d_min, p.v_max, p.horizon, p.dv, p.path, p.dp.tau_s, p.dt)
    for k in np.flatnonzero(decision):
        belief = real_trace.belief_at(int(k))
        cmd = float(real_trace.signal("cmd")[k])
        want = plan_slack_oracle(belief, cfg, p.dp.tracking, cmd, p.dt)
        if want < 0 and cmd == 0.0:
            continue  # fallback stop; compliant by definition
        assert rob[k] == pytest.approx(want, abs=1e-9)
    assert (rob[decision] >= -1e-9).all()


def test_obstacle_free_trace_is_not_applicable():
    trace = run_scenario(ScenarioParams(duration=5.0))
    for atom in (SeparationBound(30.0), StateErrorBound("position_m", "obstacle", 2.0),
                 ObstacleBehaviour("constant_velocity", 5.0, 0.0)):
        outcome = ClauseMonitor("X", "guarantee", (atom,)).evaluate(trace)
        assert outcome.status == NOT_APPLICABLE


def test_clause_takes_worst_atom(real_trace):
    loose = SeparationBound(1.0)
    tight = SeparationBound(1e6)
    both = ClauseMonitor("X", "guarantee", (loose, tight)).evaluate(real_trace)
    assert both.status == VIOLATED and both.first_tick == 0
    assert ClauseMonitor("X", "guarantee", (loose,)).evaluate(real_trace).status == HELD


def test_missing_signal_raises_monitor_error(real_trace):
    signals = dict(real_trace.signals)
    del signals["own.cross_track"]
    broken = Trace(real_trace.params, "nominal", signals)
    with pytest.raises(MonitorError, match="own.cross_track"):
        atom_robustness(broken, TrackingBound(1.0, 0.2, 10.0))


def test_own_dimensions_cannot_be_monitored(real_trace):
    with pytest.raises(MonitorError):
        atom_robustness(real_trace, StateErrorBound("dimensions_m", "own", 1.0))


def test_mpcs_monitor_set(ferry):
    monitors = build_monitors(ferry, "MPCS")
    kinds = {m.clause_id: m.kind for m in monitors}
    assert kinds == {
        "MPCS.A1": "assumption", "MPCS.A2": "assumption", "MPCS.A3": "assumption",
        "MPCS.A4": "assumption", "SITAW.A1": "assumption",
        "Ferry.G1": "guarantee", "MPCS.G1": "guarantee", "MPCS.G2": "guarantee",
    }
