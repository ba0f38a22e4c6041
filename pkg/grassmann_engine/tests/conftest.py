"""Pytest configuration and shared fixtures for the engine unit tests."""

import os
import sys

import pytest

# Ensure project root is on PYTHONPATH for grassmann_engine imports
_project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if _project_root not in sys.path:
    sys.path.insert(0, _project_root)

from grassmann_engine.harmonic_sequences import bundle_from_sections, const_coord, pad_end, veronese  # noqa: E402
from grassmann_engine.hermitian_ambient import VecRF, WeightedSpace  # noqa: E402
from grassmann_engine.exact_algebra import ONE, Z, ZB, ZERO  # noqa: E402


@pytest.fixture(scope="session")
def conic_pair():
    """V0 + V1 of the conic in G(2,3): K=2, |B|^2=4."""
    return bundle_from_sections([veronese(2, 0), veronese(2, 1)])


@pytest.fixture(scope="session")
def line_plus_constant():
    """V0 of the line padded, plus e_2 in G(2,3): K=4, |B|^2=0."""
    return bundle_from_sections([pad_end(veronese(1, 0), 1), const_coord(3, 2)])


@pytest.fixture(scope="session")
def non_harmonic():
    """Span of (1, z+zb, 0) and e_2: a real line with non-geodesic speed, plus a constant direction."""
    space = WeightedSpace.standard(3)
    return bundle_from_sections([VecRF.of(space, [ONE, Z + ZB, ZERO]), const_coord(3, 2)])
