"""Shared fixtures: the reference potential and an expensive cell solve."""

import numpy as np
import pytest

from dgmm.cell2d import solve_cell
from dgmm.potentials import make_w0


@pytest.fixture(scope="session")
def w0():
    return make_w0()


@pytest.fixture(scope="session")
def cell64(w0):
    """The 64x64 cell solution for the reference potential (a few seconds;
    shared by the cell, gluing, and acceptance tests)."""
    return solve_cell(w0, grid=64)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
