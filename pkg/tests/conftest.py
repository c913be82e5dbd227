from pathlib import Path

import numpy as np
import pytest

from canondual import SolverConfig, double_well_example

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Reference critical points of the double-well benchmark (q=1, c=1, d=6, e=15),
# rounded to two or three decimals; columns (x, mu, sigma, f, P^d, G).
KKT_POINTS = np.array(
    [
        [1.023, 0.004, -5.48, -0.5, -0.5, 0.98],
        [-1.023, 0.36, -5.48, 1.55, 1.55, -0.98],
        [4.791, -0.14, 5.48, 6.69, 6.69, 0.21],
        [-4.791, -0.22, 5.48, 16.27, 16.27, -0.21],
    ]
)

# Reference sub-problem points at mu_k=1, nu=5 (third-row sigma and G and fifth-row
# L and P^d are inconsistent with the formulas); columns (x, tau, sigma, L, P^d, G, mu+tau).
SUB_POINTS = np.array(
    [
        [1.69, -0.91, -4.57, -2.74, -2.74, 0.59, 0.09],
        [-1.52, -0.66, -4.84, 0.48, 0.48, -0.66, 0.34],
        [4.53, -1.18, 0.36, 3.32, 3.32, 1.88, -0.18],
        [-4.50, -1.30, 4.13, 12.35, 12.35, -0.22, -0.30],
        [-0.12, 0.59, -5.99, 3.72, 3.72, -8.54, 1.59],
        [-3.65, -2.96, 0.65, 17.38, 17.38, -0.27, -1.96],
        [3.57, -2.99, 0.36, 10.16, 10.16, 0.28, -1.99],
    ]
)


@pytest.fixture(scope="session")
def example1():
    return double_well_example(q=1.0, c=1.0, d=6.0, e=15.0)


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig(x_box=(-6.0, 6.0), mult_box=(-2.0, 2.0))


@pytest.fixture(scope="session")
def example1_points(example1, cfg):
    from canondual import solve_critical_points

    return solve_critical_points(example1, cfg)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
