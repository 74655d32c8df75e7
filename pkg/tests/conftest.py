import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from critineq.grids import PeriodicGrid
from critineq.groundstate import SolverConfig, VariationalProblem, solve
from critineq.groups import euclidean
from critineq.spectral import negative_laplacian


def _solve(n, L, N, p, q, tol):
    grid = PeriodicGrid(n=n, L=L, N=N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prob = VariationalProblem(
            group=euclidean(n), op=negative_laplacian(grid), p=p, q=q
        )
        return prob, solve(prob, SolverConfig(restarts=1, tol_pde=tol))


@pytest.fixture(scope="session")
def townes():
    """euclidean(2), p=2, q=4 at the benchmark resolution, tightly converged."""
    return _solve(2, 30.0, 256, 2.0, 4.0, 1e-13)


@pytest.fixture(scope="session")
def townes_small_box():
    return _solve(2, 15.0, 128, 2.0, 4.0, 1e-13)


@pytest.fixture(scope="session")
def fractional():
    """euclidean(1), p=2, q=4: the half-Laplacian cubic ground state."""
    return _solve(1, 200.0, 4096, 2.0, 4.0, 1e-13)


@pytest.fixture(scope="session")
def fractional_double_box():
    return _solve(1, 400.0, 8192, 2.0, 4.0, 1e-13)
