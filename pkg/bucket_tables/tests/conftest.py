import numpy as np
import pytest

from bucket_tables.problem import CostFunction, Problem

# ensure we get pretty pytest-style diffs in this module :)
pytest.register_assert_rewrite("bucket_tables.tests.utils")


@pytest.fixture
def square():
    """Four binary variables on a cycle with one chord; optimum 4 at (0, 1, 0, 1)."""
    return Problem(
        domains=(2, 2, 2, 2),
        functions=(
            CostFunction((0, 1), [2, 1, 3, 3]),
            CostFunction((0, 3), [2, 0, 0, 2]),
            CostFunction((1, 2), [3, 2, 1, 2]),
            CostFunction((1, 3), [2, 0, 0, 2]),
            CostFunction((2, 3), [2, 0, 0, 2]),
        ),
        name="square",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
