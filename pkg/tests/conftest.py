import pytest
from hypothesis import HealthCheck, settings

from branchdim.systems import build_catalog

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


# session scope shares cylinder-table caches across tests
@pytest.fixture(scope="session")
def gauss():
    return build_catalog("gauss")


@pytest.fixture(scope="session")
def luroth():
    return build_catalog("luroth")


@pytest.fixture(scope="session")
def tangent():
    return build_catalog("example_tangent")


@pytest.fixture(scope="session")
def affine_thirds():
    return build_catalog("affine", lengths=["1/2", "1/3", "1/6"])
