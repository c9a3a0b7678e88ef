import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lame_spectra import torus_init

RHO = np.exp(1j * np.pi / 3)


@pytest.fixture(scope="session")
def torus_2i():
    return torus_init(2j)


@pytest.fixture(scope="session")
def torus_i():
    return torus_init(1j)


@pytest.fixture(scope="session")
def torus_rho():
    return torus_init(RHO)


@pytest.fixture(scope="session")
def torus_generic():
    return torus_init(0.3 + 1.1j)


def cell_points(torus, n, seed=0, margin=0.08, clear=0.1, avoid=()):
    """Deterministic interior points of the fundamental cell, away from the
    lattice and any points listed in ``avoid`` (mod the lattice)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z = (rng.uniform(margin, 1 - margin)
             + rng.uniform(margin, 1 - margin) * torus.tau)
        if torus.dist_to_lattice(z) < clear:
            continue
        if any(torus.dist_to_lattice(z - a) < clear for a in avoid):
            continue
        out.append(z)
    return np.asarray(out)
