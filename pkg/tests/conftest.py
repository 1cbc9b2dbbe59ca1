import numpy as np
import pytest

from wavefront import ApertureSpec, LinkBudget, SurfaceGrid

F0 = 60e9
C0 = 3.0e8
LAM = C0 / F0  # 5 mm

# bench apertures: D_y fixed, D_z in {10, 15, 20} cm
APERTURE_SIDES = [(0.025, 0.10), (0.025, 0.15), (0.025, 0.20)]


@pytest.fixture(scope="session")
def lb():
    return LinkBudget.from_db(23.0, -106.0, F0)


@pytest.fixture(scope="session")
def apertures():
    return [ApertureSpec.from_carrier(dy, dz, F0) for dy, dz in APERTURE_SIDES]


@pytest.fixture(scope="session")
def ap100(apertures):
    return apertures[0]


@pytest.fixture(scope="session")
def ap200(apertures):
    return apertures[2]


@pytest.fixture(scope="session")
def quad100(ap100):
    return SurfaceGrid.for_aperture(ap100)


@pytest.fixture(scope="session")
def quad200(ap200):
    return SurfaceGrid.for_aperture(ap200)


def brute_surface_integral(fn, d_y, d_z, n_y=400, n_z=3200):
    """Independent oracle: plain midpoint Riemann sum at a very fine step,
    no oscillation-aware corrections.  fn(y, z) -> complex integrand."""
    hy, hz = d_y / n_y, d_z / n_z
    y = (np.arange(n_y) + 0.5) * hy
    z = (np.arange(n_z) + 0.5) * hz
    return fn(y[:, None], z[None, :]).sum() * hy * hz
