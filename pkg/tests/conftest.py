import numpy as np
import pytest

from detent import GroundSet, validate_kernel
from detent.graph import empty_graph


@pytest.fixture
def on_empty():
    """Wrap a square array as a kernel on the edgeless graph of matching size."""

    def make(m):
        m = np.asarray(m, dtype=float)
        return validate_kernel(m, GroundSet(empty_graph(m.shape[0])))

    return make
