import numpy as np
import pytest

from distsimplex.cbf import (
    DOMAIN_EPS, HalfPlane, PairwiseCbf, admissible_set, approach_speed, eval_h, lie_decomposition,
    neighbor_halfplane, pairwise_constraint, partition,
)
from distsimplex.oracles import braking_final_gap, h_ref

from conftest import agent


def test_h_zero_on_boundary_with_tangential_velocity(flock_cbf):
    assert eval_h(flock_cbf, agent(2, 0, 0, 1), agent(0, 0)) == 0.0


def test_h_closing_pair(flock_cbf):
    s_i, s_j = agent(3.8, 0, -1, 0), agent(0, 0)
    assert approach_speed(s_i, s_j) == 1.0
    assert eval_h(flock_cbf, s_i, s_j) == pytest.approx(5.0, abs=1e-12)


def test_h_closing_pair_can_stop_before_dmin():
    # both agents brake along the joining line: closest approach 3.8 - 1/(4*5) = 3.75
    assert braking_final_gap([3.8, 0], [-1, 0], 5.0) == pytest.approx(3.75, abs=1e-3)
    assert braking_final_gap([3.8, 0], [-1, 0], 5.0) >= 2.0


def test_h_stationary(flock_cbf):
    assert eval_h(flock_cbf, agent(6, 0), agent(0, 0)) == pytest.approx(np.sqrt(80), abs=1e-12)
    assert eval_h(flock_cbf, agent(6, 0), agent(0, 0)) == pytest.approx(8.9443, abs=1e-4)


def test_h_signed_below_dmin(flock_cbf):
    assert eval_h(flock_cbf, agent(1.8, 0), agent(0, 0)) == pytest.approx(-2.0, abs=1e-12)


def test_h_coincident_raises(flock_cbf):
    with pytest.raises(ValueError, match="coincident"):
        eval_h(flock_cbf, agent(1, 1), agent(1, 1))


def test_h_matches_reference(flock_cbf):
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, v = rng.normal(size=2) * 4, rng.normal(size=2)
        assert eval_h(flock_cbf, agent(*p, *v), agent(0, 0)) == pytest.approx(
            float(h_ref(p, v, 5.0, 2.0)), rel=1e-12, abs=1e-12)


def test_lie_stationary(flock_cbf):
    lie = lie_decomposition(flock_cbf, agent(0, 3), agent(0, 0))
    assert lie.drift == 0.0
    assert tuple(lie.coeff_i) == (0.0, 1.0)
    assert tuple(lie.coeff_j) == (-0.0, -1.0)


def test_lie_against_finite_difference(flock_cbf):
    s_i, s_j = agent(3.8, 0, -1, 0), agent(0, 0)
    lie = lie_decomposition(flock_cbf, s_i, s_j)
    delta = 1e-6 * 0.1
    rng = np.random.default_rng(0)
    for a_i, a_j in [((0, 0), (0, 0)), ((5, 0), (0, 0)), ((0, 0), (0, -5))] + [
            (rng.normal(size=2), rng.normal(size=2)) for _ in range(5)]:
        da = np.subtract(a_i, a_j)
        dp, dv = np.array([3.8, 0.0]), np.array([-1.0, 0.0])
        hp = h_ref(dp + dv * delta + 0.5 * da * delta**2, dv + da * delta, 5.0, 2.0)
        hm = h_ref(dp - dv * delta + 0.5 * da * delta**2, dv - da * delta, 5.0, 2.0)
        fd = (hp - hm) / (2 * delta)
        assert lie.rate(a_i, a_j) == pytest.approx(fd, rel=1e-5)


def test_lie_common_acceleration_cancels(flock_cbf):
    lie = lie_decomposition(flock_cbf, agent(3, 1, -1, 0.5), agent(0, 0, 0.3, 0))
    base = lie.rate((0, 0), (0, 0))
    assert lie.rate((1.5, -2), (1.5, -2)) == pytest.approx(base, abs=1e-12)
    assert np.allclose(lie.coeff_i, -lie.coeff_j)
    assert np.linalg.norm(lie.coeff_i) == pytest.approx(1.0)


def test_lie_inside_dmin_raises(flock_cbf):
    with pytest.raises(ValueError):
        lie_decomposition(flock_cbf, agent(2, 0), agent(0, 0))


def test_constraint_far_stationary_pair():
    cbf = PairwiseCbf(5.0, 2.0, gamma=0.5)
    P, Q, b = pairwise_constraint(cbf, agent(6, 0), agent(0, 0))
    assert b == pytest.approx(357.77, abs=0.01)
    assert b == pytest.approx(0.5 * 80**1.5, rel=1e-12)
    assert tuple(P) == (-1.0, -0.0)
    assert np.allclose(Q, -P)


def test_partition_halves():
    (n_i, o_i), (n_j, o_j) = partition(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 2.0)
    assert tuple(n_i) == (1.0, 0.0) and o_i == 1.0
    assert tuple(n_j) == (0.0, 1.0) and o_j == 1.0


def test_partition_negative_budget_sound():
    P, Q, b = np.array([1.0, 2.0]), np.array([-1.0, 0.5]), -3.0
    (n_i, o_i), (n_j, o_j) = partition(P, Q, b)
    assert o_i < 0 and o_j < 0
    u_i = n_i * o_i / (n_i @ n_i)
    u_j = n_j * o_j / (n_j @ n_j)
    assert P @ u_i + Q @ u_j <= b + 1e-12


def test_halfplane_normalizes_and_drops_vacuous():
    hp = HalfPlane.make((3.0, 4.0), 10.0)
    assert np.linalg.norm(hp.normal) == pytest.approx(1.0) and hp.offset == pytest.approx(2.0)
    assert HalfPlane.make((0.0, 0.0), 1.0) is None
    with pytest.raises(ValueError):
        HalfPlane.make((0.0, 0.0), -1.0)


def test_admissible_no_neighbors(flock_cbf, flock_limits):
    adm = admissible_set(flock_cbf, agent(0, 0), [], flock_limits)
    assert adm.halfplanes == () and adm.action_bound == 5.0
    assert adm.contains((5.0, 0.0)) and not adm.contains((5.1, 0.0))


def test_admissible_far_stationary_contains_origin(flock_cbf, flock_limits):
    adm = admissible_set(flock_cbf, agent(0, 0), [agent(3.9, 0)], flock_limits)
    assert len(adm.halfplanes) == 1
    assert adm.contains((0.0, 0.0))


def test_fallback_halfplane_inside_domain_margin(flock_cbf):
    hp = neighbor_halfplane(flock_cbf, agent(2.0 + DOMAIN_EPS / 2, 0), agent(0, 0))
    assert tuple(hp.normal) == (-1.0, -0.0) and hp.offset == -2.5
    assert hp.holds((2.5, 0.0)) and not hp.holds((2.0, 0.0))


def test_unary_halfplanes_added(flock_cbf, flock_limits):
    extra = HalfPlane.make((0.0, 1.0), 0.0)
    adm = admissible_set(flock_cbf, agent(0, 0), [], flock_limits, unary=[extra])
    assert adm.sources == (None,)
    assert not adm.contains((0.0, 1.0))
