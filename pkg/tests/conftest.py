"""Shared fixtures: the bundled corpus surfaces, built once per session."""

import pytest

from conesurf.corpus import (
    doubled_right_triangle,
    flat_torus,
    marked_torus,
    pillowcase,
    regular_octagon,
)


@pytest.fixture(scope="session")
def torus():
    return flat_torus()


@pytest.fixture(scope="session")
def mtorus():
    return marked_torus()


@pytest.fixture(scope="session")
def octagon():
    return regular_octagon()


@pytest.fixture(scope="session")
def pcase():
    return pillowcase()


@pytest.fixture(scope="session")
def dtriangle():
    return doubled_right_triangle()
