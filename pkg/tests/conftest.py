"""Shared fixtures and a dense, from-scratch reference construction of the lattice operators.

The reference builders use plain numpy loops and ``np.kron`` so they share no
code with the sparse implementation they are compared against.
"""

import numpy as np
import pytest

from pauli_susy import catalog
from pauli_susy.lattice import Grid

SIGMA = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def ref_momentum_1d(m, h, periodic=False):
    p = np.zeros((m, m), dtype=complex)
    for n in range(m):
        for step, coef in ((1, -1j / (2 * h)), (-1, 1j / (2 * h))):
            k = n + step
            if periodic:
                k %= m
            if 0 <= k < m:
                p[n, k] += coef
    return p


def ref_orbital(grid, one_d, axis):
    mats = [np.eye(m) for m in grid.points]
    mats[axis] = one_d
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def ref_flip(m):
    return np.eye(m)[::-1]


def ref_coordinates(grid):
    out = []
    for i in range(grid.points[0]):
        for j in range(grid.points[1]):
            for k in range(grid.points[2]):
                idx = (i, j, k)
                out.append([(idx[a] - (grid.points[a] - 1) / 2) * grid.spacing[a] for a in range(3)])
    return np.array(out)


def ref_q0(grid, potential):
    """Dense ``sum sigma_i (x) (p_i - A_i)`` with ``potential(r) -> (Ax, Ay, Az)``."""
    coords = ref_coordinates(grid)
    values = np.array([potential(*r) for r in coords])
    q0 = np.zeros((grid.dim, grid.dim), dtype=complex)
    for a in range(3):
        p = ref_orbital(grid, ref_momentum_1d(grid.points[a], grid.spacing[a], grid.bc == "periodic"), a)
        q0 += np.kron(SIGMA[a + 1], p - np.diag(values[:, a]))
    return q0


@pytest.fixture(scope="session")
def grid3():
    return Grid.cubic(3, 1.0)


@pytest.fixture(scope="session")
def grid5():
    return Grid.cubic(5, 0.5)


@pytest.fixture(scope="session")
def grid7():
    return Grid.cubic(7, 0.5)


@pytest.fixture(scope="session")
def free():
    return catalog.builtin("free").spec


@pytest.fixture(scope="session")
def wire():
    return catalog.builtin("wire", {"delta": 0.05}).spec


@pytest.fixture(scope="session")
def solenoid():
    return catalog.builtin("solenoid").spec


@pytest.fixture(scope="session")
def octopole():
    return catalog.builtin("octopole", {"a": 1.0, "delta": 0.1}).spec
