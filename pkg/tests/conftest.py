import numpy as np
import pytest

from innosearch import (
    CostModel,
    ModelParams,
    SolverConfig,
    frontier_sequence,
    value_iteration,
)

# Shared baseline instance: p = 1/2, prize 2, discount 0.9, reciprocal cost
# j / (1 - j). Search is worthwhile (p v = 1 > 0 = c(0)) and the one-shot
# boundary q* = 1/2 and cap j* = 2 - sqrt(2) have closed forms, which makes
# this instance convenient to pin numbers against.


@pytest.fixture(scope="session")
def base_params():
    return ModelParams(0.5, 2.0, 0.9, CostModel.reciprocal(0.0, 1.0))


@pytest.fixture(scope="session")
def log_params():
    return ModelParams(0.5, 2.0, 0.9, CostModel.logarithmic(0.1, 1.0))


@pytest.fixture(scope="session")
def base_solution(base_params):
    return value_iteration(base_params, SolverConfig(grid_size=2048, tol=1e-9))


@pytest.fixture(scope="session")
def base_path(base_solution):
    return frontier_sequence(base_solution, 200)


def random_params(rng, family_index=0):
    """One random well-posed instance; alternates cost families by index."""
    p = float(rng.uniform(0.3, 0.7))
    delta = float(rng.uniform(0.8, 0.93))
    c0 = float(rng.uniform(0.0, 0.3))
    k = float(rng.uniform(0.5, 2.0))
    v = (c0 + float(rng.uniform(0.5, 1.5))) / p
    cost = CostModel.reciprocal(c0, k) if family_index % 2 == 0 else CostModel.logarithmic(c0, k)
    return ModelParams(p, v, delta, cost)


def sample_instances(seed, count):
    rng = np.random.default_rng(seed)
    return [random_params(rng, i) for i in range(count)]
