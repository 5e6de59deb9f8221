import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ltvcontrol import CoeffMatrixFn, LtvSystem, TimeGrid


def make_system(A, B, C, tau=1.0, steps=200, quadrature="trapezoid", nodes=None):
    """Build an LtvSystem from constant matrices or CoeffMatrixFn instances."""
    grid = TimeGrid(nodes, quadrature) if nodes is not None else TimeGrid.uniform(
        tau, steps, quadrature)

    def coerce(M):
        if isinstance(M, CoeffMatrixFn):
            return M
        return CoeffMatrixFn.constant(np.atleast_2d(np.asarray(M, dtype=float)))

    A, B, C = coerce(A), coerce(B), coerce(C)
    return LtvSystem(n=A.rows, m=B.cols, p=C.rows, A=A, B=B, C=C, grid=grid)


def scalar_system(a=1.0, b=1.0, c=1.0, tau=1.0, steps=200, quadrature="trapezoid"):
    return make_system([[a]], [[b]], [[c]], tau=tau, steps=steps, quadrature=quadrature)


def random_poly_system(rng, n=None, degree=None, m=None, p=None, steps=200,
                       quadrature="trapezoid", scale=0.5):
    """Random polynomial-coefficient system with modest norms (n <= 6, degree <= 3)."""
    n = n if n is not None else int(rng.integers(1, 7))
    m = m if m is not None else int(rng.integers(1, n + 1))
    p = p if p is not None else int(rng.integers(1, n + 1))
    degree = degree if degree is not None else int(rng.integers(0, 4))
    A = CoeffMatrixFn.poly(rng.uniform(-scale, scale, size=(degree + 1, n, n)))
    B = CoeffMatrixFn.constant(rng.uniform(-1, 1, size=(n, m)))
    C = CoeffMatrixFn.constant(rng.uniform(-1, 1, size=(p, n)))
    return make_system(A, B, C, steps=steps, quadrature=quadrature)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
