import numpy as np
import pytest

from coopisac.channel import gen_static_channels, link_state
from coopisac.metrics import FilterSet, sensing_functionals
from coopisac.scenario import desk_scenario
from coopisac.trajectory import TrajectorySet


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk():
    return desk_scenario()


@pytest.fixture(scope="session")
def desk_state(desk):
    """Straight-line geometry with matched filters on the desk scenario."""
    traj = TrajectorySet.straight_line(desk)
    links = link_state(desk, traj.q)
    statics = gen_static_channels(desk)
    filters = FilterSet.matched(links)
    sf = sensing_functionals(filters, links, statics, desk)
    return {"traj": traj, "links": links, "statics": statics, "filters": filters, "sf": sf}


def rand_herm(rng, n, pd=False):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if pd:
        return a @ a.conj().T + 0.1 * np.eye(n)
    return 0.5 * (a + a.conj().T)
