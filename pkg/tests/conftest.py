import pytest
from hypothesis import HealthCheck, settings

from anytime_moco.ilp import Constraint
from anytime_moco.problems import ProblemInstance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def small_kp(profits, weights, capacity, name="kp"):
    """Knapsack in minimization form from raw (positive) profits."""
    p, n = len(profits), len(weights)
    return ProblemInstance(
        name, "KP", p, n, [[-v for v in row] for row in profits], [Constraint(list(weights), "<=", capacity)], [(0, 1)] * n
    )


@pytest.fixture
def kp3():
    # items: (profit1, profit2, weight) = (3,1,2), (1,3,2), (2,2,2), capacity 4
    return small_kp([[3, 1, 2], [1, 3, 2]], [2, 2, 2], 4)
