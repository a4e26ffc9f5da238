import numpy as np
import pytest

from distsimplex import AgentState, PairwiseCbf, PhysicalLimits


@pytest.fixture
def flock_limits():
    return PhysicalLimits(a_max=5.0, v_max=2.5, sense_radius=4.0, d_min=2.0, eta=0.1)


@pytest.fixture
def flock_cbf(flock_limits):
    return PairwiseCbf.from_limits(flock_limits)


def agent(px, py, vx=0.0, vy=0.0):
    return AgentState(np.array([px, py], float), np.array([vx, vy], float))
