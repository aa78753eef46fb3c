import json
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import qmc

from chargedmass import catalog as cat

FIXTURES = Path(__file__).parent / "fixtures"


def catalog_entries():
    """The metric members of the catalog at the parameters used across the suite."""
    return [
        cat.euclidean(),
        cat.schwarzschild_isotropic(1.0),
        cat.rn_slice(2.0, 1.0, 0.0),
        cat.rn_slice(3.0, 1.0, 2.0),
        cat.extreme_rn(1.0),
    ]


def entry_id(entry):
    return entry.label


def annulus_points(r_in, r_out, n, seed=0):
    """Quasi-random points in an annulus, uniform in r and on the sphere."""
    m = int(np.ceil(np.log2(n)))
    u = qmc.Sobol(d=3, scramble=True, seed=seed).random_base2(m)[:n]
    r = r_in + (r_out - r_in) * u[:, 0]
    ct = 2 * u[:, 1] - 1
    st = np.sqrt(1 - ct**2)
    ph = 2 * np.pi * u[:, 2]
    return r[:, None] * np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1)


@pytest.fixture(scope="session")
def symbolic():
    return json.loads((FIXTURES / "symbolic.json").read_text())
