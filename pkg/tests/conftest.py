import numpy as np
import pytest

from podreliab.trajectory import Trajectory


@pytest.fixture
def grid_traj():
    """Factory for on-grid trajectories from coordinate lists."""

    def make(vessel_id, xs, ys, t_start=0, step=60):
        n = len(xs)
        t = t_start + step * np.arange(n, dtype=np.int64)
        return Trajectory(vessel_id, t, np.asarray(xs, dtype=float),
                          np.asarray(ys, dtype=float), step_seconds=step)

    return make
