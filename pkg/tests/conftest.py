import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def counterexample_instance():
    """Noiseless p=3 instance where marginal screening picks the wrong column.

    Columns 0 and 1 carry the response (y = X0 + X1, both coefficients 1);
    column 2 is a unit vector built mostly from y's direction, so it wins
    the marginal comparison (|X2'y| = 0.95*sqrt(3) > 1.5 = |X0'y| = |X1'y|)
    while being orthogonal to y after tilting away columns 0 and 1. At
    threshold 0.6 the conditioning sets are C0 = C1 = {2}, C2 = {0, 1}.
    """
    from tiltsel.linalg import normalize_columns

    n = 5
    e = np.eye(n)
    x0 = e[:, 0]
    x1 = 0.5 * e[:, 0] + np.sqrt(0.75) * e[:, 1]
    y = x0 + x1
    x2 = 0.95 * y / np.linalg.norm(y) + np.sqrt(1 - 0.95**2) * e[:, 2]
    X = normalize_columns(np.column_stack([x0, x1, x2]))
    return X, y
