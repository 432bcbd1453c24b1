import numpy as np
import pytest

from qigkit import (
    ConfigurationSpace,
    gaussian_shift_family,
    linear_phase_family,
    mixed_family,
    vortex_family,
)


@pytest.fixture
def small_space():
    return ConfigurationSpace(points=[0.0, 1.0, 2.0], weights=[0.2, 0.3, 0.5])


@pytest.fixture
def gaussian_family():
    return gaussian_shift_family(sigma=1.0, n=65)


def builtin_families():
    """The four stock families with parameters exercising every term."""
    return [
        gaussian_shift_family(sigma=1.0, n=65),
        linear_phase_family(k=1.0, n=65),
        mixed_family(sigma=1.0, k=0.7, n=65),
        vortex_family(winding=2, epsilon=0.3, n=49),
    ]


def family_test_points(family, count=5):
    """A small x grid inside the family's comfortable domain."""
    if family.dim == 1:
        return np.linspace(-1.0, 1.0, count)[:, np.newaxis]
    angles = 2.0 * np.pi * np.arange(count) / count + 0.1
    return 1.2 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
