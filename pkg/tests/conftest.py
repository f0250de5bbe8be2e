"""Shared fixtures: canonical measures and frozen closed-form values.

The ANALYTIC constants were computed from the cascade closed forms
(tau(q) = -log2 sum p_i^q and its derivative) with 25-digit arithmetic
for weights (0.4, 0.3, 0.2, 0.1), independently of the library code.
"""

import numpy as np
import pytest

from mfia import cascade, holder, measures

WEIGHTS = (0.4, 0.3, 0.2, 0.1)

ANALYTIC = {
    "tau0": -2.0,
    "tau1": 0.0,
    "tau2": 1.7369655941662062,
    "tau-5": -16.661140361379603,
    "tau5": 6.2653445665209949,
    "alpha0": 2.1756874697070733,
    "alpha1": 1.8464393446710155,
    "alpha2": 1.6464393446710155,
    "alpha-5": 3.2835955632315661,
    "alpha5": 1.4256620274448693,
    "f0": 2.0,
    "f1": 1.8464393446710155,
    "f2": 1.5559130951758248,
    "f-5": 0.24316254522177218,
    "f5": 0.86296557070335166,
    "d-5": 2.7768567268966004,
    "d5": 1.5663361416302487,
}


@pytest.fixture(scope="session")
def uniform256():
    return measures.as_measure(np.full((256, 256), 100.0))


@pytest.fixture(scope="session")
def c8():
    spec = cascade.CascadeSpec(weights=WEIGHTS, depth=8, shuffle=False)
    return cascade.generate_cascade(spec)


@pytest.fixture(scope="session")
def c8_shuffled():
    spec = cascade.CascadeSpec(weights=WEIGHTS, depth=8, shuffle=True, seed=7)
    return cascade.generate_cascade(spec)


@pytest.fixture(scope="session")
def c8_map(c8_shuffled):
    return holder.alpha_map(c8_shuffled)


@pytest.fixture(scope="session")
def square_image():
    """Filled bright square on a zero background (edge-extraction fixture)."""
    pixels = np.zeros((256, 256), dtype=np.uint8)
    pixels[64:192, 64:192] = 200
    return measures.GrayImage(pixels)
