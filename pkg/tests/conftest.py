import numpy as np
import pytest

import trajreeb as tr


@pytest.fixture
def pair_set():
    """Two trajectories whose step distances are 3, 2, 1, 1, 3, 3.

    At epsilon 1.5 they connect at step 2 and disconnect at step 4.
    """
    t1 = [(k, 0, 0) for k in range(6)]
    t2 = [(0, 3, 0), (1, 2, 0), (2, 1, 0), (3, 1, 0), (4, 3, 0), (5, 3, 0)]
    return tr.make_set([t1, t2])


@pytest.fixture
def pair_plain(pair_set):
    """The pair instance in the plain-tuple form the oracles use."""
    return [(t.id, np.asarray(t.points), t.start_step) for t in pair_set]
