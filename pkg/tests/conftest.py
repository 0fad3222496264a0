import pytest

from stokestab.dispersion import build_context
from stokestab.stokes import build_tables


@pytest.fixture(scope="session")
def ctx1():
    return build_context(1.0)


@pytest.fixture(scope="session")
def tables1(ctx1):
    return build_tables(ctx1)


@pytest.fixture(scope="session")
def km1(ctx1, tables1):
    from stokestab.kato import assemble_matrix_coeffs
    return assemble_matrix_coeffs(ctx1, tables1)
