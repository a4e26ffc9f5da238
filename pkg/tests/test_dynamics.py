import numpy as np
import pytest

from distsimplex.dynamics import (
    AgentState, CorruptStateError, MasState, PhysicalLimits, clip_norm, clip_rows, neighbors, step_dynamics,
)
from distsimplex.oracles import euler_substeps, neighbors_bruteforce

from conftest import agent


def test_rest_stays_at_rest(flock_limits):
    s = step_dynamics(agent(0, 0), (0, 0), flock_limits)
    assert tuple(s.position) == (0, 0) and tuple(s.velocity) == (0, 0)


def test_uniform_motion(flock_limits):
    s = step_dynamics(agent(0, 0, 1, 0), (0, 0), flock_limits)
    assert s.position == pytest.approx((0.1, 0))
    assert tuple(s.velocity) == (1, 0)


def test_full_throttle_from_rest(flock_limits):
    s = step_dynamics(agent(0, 0), (5, 0), flock_limits)
    assert s.position == pytest.approx((0.025, 0), abs=1e-15)
    assert s.velocity == pytest.approx((0.5, 0), abs=1e-15)


def test_full_throttle_against_substepped_euler(flock_limits):
    # forward Euler's first-order error a eta^2 / (2N) is 2.5e-5 here, so the
    # 1e-6 agreement asked for this example cannot hold at N = 1000
    s = step_dynamics(agent(0, 0), (5, 0), flock_limits)
    p, v = euler_substeps([0, 0], [0, 0], [5, 0], flock_limits.eta, 1000)
    assert np.abs(s.position - p).max() <= 1e-6
    assert np.abs(s.velocity - v).max() <= 1e-6


def test_euler_oracle_converges_at_first_order(flock_limits):
    errs = []
    for n in (1000, 10000, 100000):
        p, _ = euler_substeps([0, 0], [0, 0], [5, 0], flock_limits.eta, n)
        errs.append(abs(p[0] - 0.025))
    assert errs[0] == pytest.approx(5 * 0.01 / 2000, rel=1e-6)
    assert errs[1] == pytest.approx(errs[0] / 10, rel=1e-3)
    assert errs[2] == pytest.approx(errs[0] / 100, rel=1e-2)


def test_velocity_is_clipped_preserving_direction(flock_limits):
    s = step_dynamics(agent(0, 0, 2.0, 2.0), (5 / np.sqrt(2), 5 / np.sqrt(2)), flock_limits)
    assert np.hypot(*s.velocity) <= 2.5
    assert s.velocity[0] == pytest.approx(s.velocity[1])


def test_action_above_bound_rejected(flock_limits):
    with pytest.raises(ValueError):
        step_dynamics(agent(0, 0), (5.1, 0), flock_limits)
    step_dynamics(agent(0, 0), (5 + 1e-10, 0), flock_limits)


def test_non_finite_rejected(flock_limits):
    with pytest.raises(CorruptStateError):
        step_dynamics(agent(0, 0), (np.nan, 0), flock_limits)
    with pytest.raises(CorruptStateError):
        AgentState(np.array([np.inf, 0.0]), np.zeros(2))
    with pytest.raises(CorruptStateError):
        MasState(np.array([[0.0, np.nan]]), np.zeros((1, 2)))


def test_clip_norm_exact_and_idempotent():
    v = clip_norm((3.0, 4.0), 2.5)
    assert np.hypot(*v) <= 2.5
    assert np.array_equal(clip_norm(v, 2.5), v)
    assert tuple(clip_norm((1.0, 0.0), 2.5)) == (1.0, 0.0)


def test_clip_rows_matches_clip_norm():
    rng = np.random.default_rng(1)
    rows = rng.normal(size=(200, 2)) * 3
    out = clip_rows(rows, 2.5)
    for r, o in zip(rows, out):
        assert np.array_equal(clip_norm(r, 2.5), o)


@pytest.mark.parametrize("field,value", [("a_max", 0.0), ("v_max", -1.0), ("eta", float("nan")), ("d_min", 0.0)])
def test_limits_must_be_positive(field, value):
    kw = dict(a_max=5.0, v_max=2.5, sense_radius=4.0, d_min=2.0, eta=0.1)
    kw[field] = value
    with pytest.raises(ValueError, match=field):
        PhysicalLimits(**kw)


def test_limits_dmin_below_radius():
    with pytest.raises(ValueError, match="d_min < sense_radius"):
        PhysicalLimits(a_max=5.0, v_max=2.5, sense_radius=4.0, d_min=4.0, eta=0.1)


def test_neighbors_strict_radius(flock_limits):
    st = MasState([[0, 0], [3.9, 0]], np.zeros((2, 2)))
    assert neighbors(st, 0, flock_limits) == [1] and neighbors(st, 1, flock_limits) == [0]
    st = MasState([[0, 0], [4.0, 0]], np.zeros((2, 2)))
    assert neighbors(st, 0, flock_limits) == [] and neighbors(st, 1, flock_limits) == []


def test_neighbors_on_a_line(flock_limits):
    pos = np.array([[float(k), 0.0] for k in range(15)])
    st = MasState(pos, np.zeros((15, 2)))
    assert neighbors(st, 7, flock_limits) == [4, 5, 6, 8, 9, 10]
    assert neighbors(st, 7, flock_limits) == neighbors_bruteforce(pos, 7, 4.0)


def test_neighbors_bad_index(flock_limits):
    st = MasState([[0, 0]], np.zeros((1, 2)))
    with pytest.raises(IndexError):
        neighbors(st, 1, flock_limits)


def test_state_arrays_read_only():
    st = MasState([[0, 0], [1, 1]], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        st.positions[0, 0] = 5.0
    with pytest.raises(ValueError):
        st.agents[1].velocity[0] = 1.0
