"""Shared fixtures: models and projector banks are expensive at n = 3, so
they are built once per session and shared read-only (they are immutable)."""

import pytest

from qhcurv import curvature_space as cs
from qhcurv import decomposition as dec
from qhcurv import torsion as tor
from qhcurv.model_space import build_model

_CACHE = {}


def _get(key, builder):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


@pytest.fixture(scope="session", params=[2, 3])
def n(request):
    return request.param


@pytest.fixture(scope="session")
def model(n):
    return _get(("model", n), lambda: build_model(n))


@pytest.fixture(scope="session")
def model2():
    return _get(("model", 2), lambda: build_model(2))


@pytest.fixture(scope="session")
def model3():
    return _get(("model", 3), lambda: build_model(3))


def get_bank(n):
    return _get(("bank", n),
                lambda: dec.build_sp_projectors(_get(("model", n), lambda: build_model(n))))


def get_torsion_bank(n):
    return _get(("tbank", n),
                lambda: tor.build_torsion_bank(_get(("model", n), lambda: build_model(n))))


@pytest.fixture(scope="session")
def bank(n):
    return get_bank(n)


@pytest.fixture(scope="session")
def bank2():
    return get_bank(2)


@pytest.fixture(scope="session")
def bank3():
    return get_bank(3)


@pytest.fixture(scope="session")
def tbank(n):
    return get_torsion_bank(n)


@pytest.fixture(scope="session")
def tbank2():
    return get_torsion_bank(2)


def random_torsion(tbank, seed):
    """Random element of the full torsion space."""
    rng = cs.substream("tests-torsion", tbank.model.n, seed)
    coef = rng.standard_normal(tbank.ambient.shape[0])
    d = tbank.model.dim
    return (coef @ tbank.ambient).reshape(d, d, d)


def random_derivative(tbank, seed):
    rng = cs.substream("tests-derivative", tbank.model.n, seed)
    d = tbank.model.dim
    coef = rng.standard_normal((d, tbank.ambient.shape[0]))
    return (coef @ tbank.ambient).reshape(d, d, d, d)


def random_gammas(m, seed):
    rng = cs.substream("tests-gamma", m.n, seed)
    g = rng.standard_normal((3, m.dim, m.dim))
    return g - g.swapaxes(1, 2)
