import numpy as np
import pytest

import photonsql as pq


@pytest.fixture
def gauss1():
    return pq.GaussianEnvelope(1.0)


@pytest.fixture
def product2(gauss1):
    return pq.ProductState(2, gauss1)


@pytest.fixture
def coincident3(gauss1):
    return pq.CoincidentState(3, gauss1)


@pytest.fixture
def soliton2():
    return pq.make_soliton(2, -2.0)


@pytest.fixture
def sampled_gauss():
    """exp(-k²/2) sampled on k ∈ [-6, 6] with dk = 0.01, unnormalized."""
    k = np.arange(-6.0, 6.0 + 0.005, 0.01)
    return pq.SampledEnvelope(k_min=-6.0, dk=0.01, values=np.exp(-k**2 / 2) + 0j)


def trapz_norm(envelope):
    """In-test quadrature of spectral power, independent of the library path."""
    vals = np.abs(np.asarray(envelope.values)) ** 2
    return float(np.trapezoid(vals, dx=envelope.dk))
