import pytest

from blowup_spectra import operator as O


@pytest.fixture(scope="session")
def ops96():
    return O.build_operators(O.build_grid(96))


@pytest.fixture(scope="session")
def riesz96(ops96):
    return O.riesz_projection(ops96)


@pytest.fixture(scope="session")
def ops48():
    return O.build_operators(O.build_grid(48))
