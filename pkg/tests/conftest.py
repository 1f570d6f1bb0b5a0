import numpy as np
import pytest

from upliftkit.dataset import Dataset

# six-row worked example: y, t, x1, x2, eps (outcome follows y = t*x1 + x2 + eps)
SIX_ROWS = np.array([
    [-1.12, 1, -0.90, -1.56, 1.34],
    [-0.48, 1, 1.02, -1.07, -0.43],
    [0.35, 1, 0.66, -0.14, -0.17],
    [0.99, 0, -0.64, 0.10, 0.89],
    [-1.01, 0, 0.49, -0.41, -0.60],
    [-0.34, 0, 1.42, 0.38, -0.72],
])

# scored validation rows in ranked order: prediction, y, t
SCORED_ROWS = np.array([
    [1.42, -0.34, 0],
    [1.02, -0.48, 1],
    [0.66, 0.35, 1],
    [0.49, -1.01, 0],
    [-0.64, 0.99, 0],
    [-0.90, -1.12, 1],
])

# binary-outcome sample rows: y, t, x1, x2, x3, y_star, eps
LATENT_ROWS = np.array([
    [1, 1, -1.10, -0.42, 0, 0.37, 1.47],
    [1, 0, 0.71, 0.37, 1, 1.97, 1.26],
    [1, 0, 0.89, -0.52, 0, 1.40, 0.51],
    [1, 1, 1.45, 0.04, 1, 2.89, 0.44],
    [0, 0, -1.15, -1.33, 1, -0.73, 0.42],
    [1, 0, 1.89, -0.46, 0, 2.70, 0.81],
    [0, 1, 0.65, 0.87, 0, -0.95, -1.60],
    [1, 1, 1.38, -1.59, 1, 2.08, -0.30],
    [0, 1, -1.40, -1.11, 1, -0.58, -0.18],
    [1, 1, -0.26, -0.39, 1, 1.83, 1.09],
])


@pytest.fixture
def six():
    r = SIX_ROWS
    return Dataset(r[:, 2:4], r[:, 0], r[:, 1], ["x1", "x2"])


@pytest.fixture
def scored():
    return SCORED_ROWS[:, 1], SCORED_ROWS[:, 2], SCORED_ROWS[:, 0]


def make_dataset(n=200, k=2, seed=0, binary=False):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    t = np.zeros(n)
    t[rng.permutation(n)[: n // 2]] = 1
    y = X[:, 0] * t + rng.standard_normal(n)
    if binary:
        y = (y > 0).astype(float)
    return Dataset(X, y, t)
