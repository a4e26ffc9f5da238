import logging

import numpy as np
import pytest
import yaml

from distsimplex.controllers import ReynoldsWeights
from distsimplex.scenario import (
    BUILTIN, ReynoldsConfig, ScenarioError, WaypointConfig, apply_overrides, builtin, builtin_raw, from_dict, load,
)


def test_builtin_flocking_parameters():
    scn = builtin("flocking")
    lim = scn.limits
    assert (scn.n, lim.sense_radius, lim.a_max, lim.v_max, lim.d_min, lim.eta) == (15, 4.0, 5.0, 2.5, 2.0, 0.1)
    assert scn.duration == 50.0 and scn.steps == 500
    assert scn.controller == ReynoldsConfig(ReynoldsWeights(3.0, 1.5, 0.5))
    assert scn.dsa_enabled and not builtin("flocking-nodsa").dsa_enabled


def test_builtin_waypoint_parameters():
    scn = builtin("waypoint")
    lim = scn.limits
    assert (scn.n, lim.sense_radius, lim.a_max, lim.v_max, lim.d_min, lim.eta) == (4, 1.0, 0.8, 0.2, 0.2, 0.05)
    assert scn.duration == 37.0 and scn.steps == 740
    assert isinstance(scn.controller, WaypointConfig)
    plans = scn.controller.plans
    assert all(len(p) == 4 for p in plans)
    # one waypoint per column per agent, rows permuted so routes cross
    for c in range(4):
        assert sorted(p[c][1] for p in plans) == [0.0, 0.5, 1.0, 1.5]
        assert len({p[c][0] for p in plans}) == 1


def test_unknown_builtin():
    with pytest.raises(ScenarioError, match="flocking, flocking-nodsa, waypoint"):
        builtin("swarm")
    assert BUILTIN == ("flocking", "flocking-nodsa", "waypoint")


def test_seed_determines_initial_state():
    a = builtin("flocking", 4).initial_state()
    b = builtin("flocking", 4).initial_state()
    c = builtin("flocking-nodsa", 4).initial_state()
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.velocities, c.velocities)
    assert not np.array_equal(a.positions, builtin("flocking", 5).initial_state().positions)


def test_sampled_state_is_recoverable():
    from distsimplex.scenario import _pairwise_min_h
    scn = builtin("flocking", 2)
    st = scn.initial_state()
    min_h, min_d = _pairwise_min_h(st.positions, st.velocities, scn.limits)
    assert min_h >= 0.5 and min_d >= 2.0


def test_overrides_are_typed():
    raw = apply_overrides(builtin_raw("flocking"), ["limits.eta=0.05", "cbf.m=4", "dsa_enabled=false", "new.key=1"])
    assert raw["limits"]["eta"] == 0.05 and raw["cbf"]["m"] == 4 and raw["dsa_enabled"] is False
    assert raw["new"] == {"key": 1}
    with pytest.raises(ScenarioError):
        apply_overrides(raw, ["novalue"])
    scn = builtin("flocking", overrides=["limits.eta=0.05"])
    assert scn.steps == 1000


def test_invalid_limits_named():
    with pytest.raises(ScenarioError, match="d_min < sense_radius"):
        builtin("flocking", overrides=["limits.d_min=5"])
    with pytest.raises(ScenarioError, match="a_max"):
        builtin("flocking", overrides=["limits.a_max=-1"])


def test_unknown_and_missing_keys():
    raw = builtin_raw("flocking")
    with pytest.raises(ScenarioError, match="unknown scenario keys"):
        from_dict(dict(raw, colour="red"))
    raw.pop("n")
    with pytest.raises(ScenarioError, match="missing required field"):
        from_dict(raw)
    with pytest.raises(ScenarioError, match="controller type"):
        builtin("flocking", overrides=["controller.type=pid"])


def test_m_below_two_rejected():
    with pytest.raises(ScenarioError, match="m must be"):
        builtin("flocking", overrides=["cbf.m=1"])


def test_explicit_unrecoverable_rejected():
    over = ["init.positions=[[0,0],[0,0.1],[0,1.0],[0,1.5]]"]
    with pytest.raises(ScenarioError, match="not recoverable"):
        builtin("waypoint", overrides=over)
    # without DSA the same start is accepted
    builtin("waypoint", overrides=over + ["dsa_enabled=false"])


def test_explicit_count_mismatch():
    with pytest.raises(ScenarioError, match="exactly n"):
        builtin("waypoint", overrides=["n=3"])


def test_truncated_duration_logged(caplog):
    with caplog.at_level(logging.WARNING):
        scn = builtin("flocking", overrides=["duration=10.05"])
    assert scn.steps == 100
    assert "truncated" in caplog.text


def test_load_roundtrip(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(builtin_raw("waypoint")))
    assert load(path) == builtin("waypoint")
    path.write_text("n: [unclosed")
    with pytest.raises(ScenarioError, match="cannot parse"):
        load(path)


def test_impossible_sampling_reported():
    with pytest.raises(ScenarioError, match="no recoverable initial state"):
        builtin("flocking", overrides=["init.position_range=[0, 1]", "init.max_attempts=5"]).initial_state()
