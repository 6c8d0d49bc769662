import pytest

from discgrowth.scaffold import ScaffoldParams, build_scaffold


@pytest.fixture(scope="session")
def ref_params():
    """Reference construction: k=1, p1=2, p2=p=3, defaults."""
    return ScaffoldParams.with_defaults(k=1, p1=2.0, p2=3.0, p=3.0)


@pytest.fixture(scope="session")
def ref_scaffold(ref_params):
    return build_scaffold(ref_params, 4)


@pytest.fixture(scope="session")
def small_scaffold():
    """Tiny construction whose generation-1 cells are fully enumerable."""
    params = ScaffoldParams.with_defaults(k=1, p1=2.0, p2=3.0, p=3.0, log_c=3.2, g1=3.0)
    return build_scaffold(params, 2)


@pytest.fixture(scope="session")
def wide_scaffold():
    """p > p2 so the annulus between r' and r_hat is non-degenerate."""
    params = ScaffoldParams.with_defaults(k=1, p1=2.0, p2=3.0, p=4.0, log_c=4.0, g1=3.0)
    return build_scaffold(params, 2)
