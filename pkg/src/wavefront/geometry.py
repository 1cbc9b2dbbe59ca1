"""Receiver-centric geometry: source positions, apertures, array layouts and
exact / second-order path-length differences across the receiving surface.

Coordinate system: the receiving surface lies in the yz-plane with its
reference corner at the origin, y in [0, D_y], z in [0, D_z].  Boresight is
the +x axis.  A source at distance d and angle theta (measured in the
xz-plane from boresight) sits at (d cos theta, 0, d sin theta); phi != 0
sources are supported by the math but every scenario here keeps phi = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SPEED_OF_LIGHT = 3.0e8
"""Default propagation speed (m/s); configurable where it matters.

Rounded so a 60 GHz carrier gives wavelength = 5 mm exactly and the
benchmark apertures land on round normalized-aperture values."""

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SourcePosition:
    """Transmitter location in receiver-centric polar form.

    Attributes:
        d: range from the surface reference corner (m, > 0)
        theta: angle of arrival in the xz-plane (rad)
        phi: out-of-plane angle (rad); 0 in every scenario considered here
        chi: carrier phase offset common to the whole receiver (rad, [0, 2pi))
    """

    d: float
    theta: float
    phi: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"source distance must be > 0, got {self.d}")
        object.__setattr__(self, "chi", self.chi % TWO_PI)

    @property
    def xyz(self) -> np.ndarray:
        """Cartesian position; azimuth phi rotates from +z toward +y."""
        st = math.sin(self.theta)
        return np.array(
            [
                self.d * math.cos(self.theta),
                self.d * st * math.sin(self.phi),
                self.d * st * math.cos(self.phi),
            ]
        )

    @classmethod
    def from_xyz(cls, p, chi: float = 0.0) -> "SourcePosition":
        x, y, z = (float(v) for v in p)
        d = math.sqrt(x * x + y * y + z * z)
        if d == 0.0:
            raise ValueError("source cannot sit at the receiver origin")
        theta = math.acos(min(1.0, max(-1.0, x / d)))
        phi = math.atan2(y, z) if (y != 0.0 or z != 0.0) else 0.0
        return cls(d=d, theta=theta, phi=phi, chi=chi)

    def plane_xy(self) -> np.ndarray:
        """2D Cartesian coordinates in the xz-plane (valid for phi = 0)."""
        return np.array([self.d * math.cos(self.theta), self.d * math.sin(self.theta)])


@dataclass(frozen=True)
class ApertureSpec:
    """Physical receiving aperture and its derived normalized size.

    area_phys = d_y * d_z (m^2); aperture_norm = area_phys / wavelength^2.
    """

    d_y: float
    d_z: float
    wavelength: float
    f0: float

    def __post_init__(self):
        if self.d_y <= 0 or self.d_z <= 0:
            raise ValueError("aperture sides must be positive")
        if self.wavelength <= 0 or self.f0 <= 0:
            raise ValueError("wavelength and carrier must be positive")

    @classmethod
    def from_carrier(cls, d_y: float, d_z: float, f0: float,
                     c: float = SPEED_OF_LIGHT) -> "ApertureSpec":
        return cls(d_y=d_y, d_z=d_z, wavelength=c / f0, f0=f0)

    @property
    def area_phys(self) -> float:
        return self.d_y * self.d_z

    @property
    def aperture_norm(self) -> float:
        return self.d_y * self.d_z / self.wavelength**2


@dataclass(frozen=True)
class SurfacePoint:
    """Point (0, y, z) on the receiving surface.

    phi_0yz is the in-surface azimuth measured from the +z axis toward +y,
    so cos(phi_0yz) = z / d_0yz; the polar angle of any surface point from
    boresight is pi/2 by construction.
    """

    y: float
    z: float

    @property
    def d_0yz(self) -> float:
        return math.hypot(self.y, self.z)

    @property
    def phi_0yz(self) -> float:
        return math.atan2(self.y, self.z)


class LayoutKind:
    SINGLE = "single-antenna"
    FOCAL_ARC = "focal-arc"
    PLANAR = "planar-grid"


@dataclass(frozen=True)
class ArrayLayout:
    """Antenna positions for one receiver architecture.

    aux holds per-kind metadata: focal-arc stores the beam angles theta_n
    (via sin_theta_n), planar-grid stores the (n_y, n_z) index pair per
    antenna (row-major, z-index fastest).
    """

    kind: str
    positions: np.ndarray  # (N_A, 3)
    aux: dict = field(default_factory=dict)

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]


def fraunhofer_distance(diameter: float, wavelength: float) -> float:
    """Far-field onset 2 D^2 / lambda; beyond it the wavefront is treated
    as planar and range information in the curvature is gone."""
    if diameter <= 0 or wavelength <= 0:
        raise ValueError("diameter and wavelength must be positive")
    return 2.0 * diameter * diameter / wavelength


def direction_cosine(p: SourcePosition, s: SurfacePoint) -> float:
    """cos of the angle between the source direction and the surface point
    direction: sin(theta) * cos(phi_0yz - phi)."""
    return math.sin(p.theta) * math.cos(s.phi_0yz - p.phi)


def extra_distance_exact(p: SourcePosition, s: SurfacePoint) -> float:
    """Extra path length from the source to (0, y, z) relative to the
    surface reference corner:

        a = -d + d * sqrt(1 + (d_0yz/d)^2 - 2 (d_0yz/d) g)

    with g the direction cosine above.  Evaluated in the cancellation-free
    form d * x / (sqrt(1 + x) + 1), x = t^2 - 2 t g, so small offsets keep
    full relative precision.
    """
    t = s.d_0yz / p.d
    x = t * t - 2.0 * t * direction_cosine(p, s)
    return p.d * x / (math.sqrt(1.0 + x) + 1.0)


def extra_distance_fresnel(p: SourcePosition, s: SurfacePoint) -> float:
    """Second-order expansion of the extra distance:

        a ~ -d_0yz g + d_0yz^2 (1 - g^2) / (2 d)

    The linear term carries the angle of arrival, the quadratic term the
    range-revealing wavefront curvature.
    """
    g = direction_cosine(p, s)
    r = s.d_0yz
    return -r * g + r * r * (1.0 - g * g) / (2.0 * p.d)


# ---------------------------------------------------------------------------
# vectorized surface fields of the same quantities (y, z arrays broadcast)

def extra_distance_grid(d, theta, y, z):
    """Exact extra distance for phi = 0 sources over arrays of surface
    coordinates; all arguments broadcast together."""
    xs = d * np.cos(theta)
    zs = d * np.sin(theta)
    return np.sqrt(xs * xs + y * y + (z - zs) ** 2) - d


def extra_distance_dz(d, theta, y, z):
    """d a / d z of the exact extra distance (broadcasts like the above)."""
    xs = d * np.cos(theta)
    zs = d * np.sin(theta)
    return (z - zs) / np.sqrt(xs * xs + y * y + (z - zs) ** 2)


def fresnel_distance_grid(d, theta, y, z):
    """Second-order extra distance, separable form for phi = 0 sources:
    y^2/(2d) - z sin(theta) + z^2 cos^2(theta)/(2d)."""
    st, ct = np.sin(theta), np.cos(theta)
    return y * y / (2.0 * d) - z * st + z * z * ct * ct / (2.0 * d)


# ---------------------------------------------------------------------------
# architecture layouts

def single_antenna_layout(aperture: ApertureSpec, focal_length: float) -> ArrayLayout:
    pos = np.array([[-focal_length, aperture.d_y / 2.0, aperture.d_z / 2.0]])
    return ArrayLayout(kind=LayoutKind.SINGLE, positions=pos)


def focal_arc_layout(aperture: ApertureSpec, focal_length: float,
                     count_override: Optional[int] = None) -> ArrayLayout:
    """Antennas on the focal arc behind a fixed-profile lens.

    Critically-sampled beams: sin(theta_n) = n / (D_z / lambda) for
    n = -floor(D_z/lambda) .. +floor(D_z/lambda), which makes the far-field
    responses of neighbouring antennas orthogonal.  count_override forces an
    odd antenna count (symmetric truncation / zero-padding of n).
    """
    if focal_length <= 0:
        raise ValueError("focal length must be positive")
    dz_norm = aperture.d_z / aperture.wavelength
    n_half = int(math.floor(dz_norm))
    if count_override is not None:
        if count_override < 1 or count_override % 2 == 0:
            raise ValueError("antenna count override must be odd and >= 1")
        n_half = (count_override - 1) // 2
    n = np.arange(-n_half, n_half + 1)
    sin_t = np.clip(n / dz_norm, -1.0, 1.0)
    theta_n = np.arcsin(sin_t)
    pos = np.stack(
        [
            -focal_length * np.cos(theta_n),
            np.full_like(theta_n, aperture.d_y / 2.0),
            aperture.d_z / 2.0 + focal_length * np.sin(theta_n),
        ],
        axis=1,
    )
    return ArrayLayout(
        kind=LayoutKind.FOCAL_ARC,
        positions=pos,
        aux={"sin_theta_n": sin_t, "theta_n": theta_n, "focal_length": focal_length},
    )


def planar_grid_layout(aperture: ApertureSpec) -> ArrayLayout:
    """Half-wavelength planar grid tiling the aperture: antenna n sits at
    (0, n_y lambda/2, n_z lambda/2) with n_y = n // N_z, n_z = n % N_z."""
    lam = aperture.wavelength
    n_y = int(math.floor(2.0 * aperture.d_y / lam))
    n_z = int(math.floor(2.0 * aperture.d_z / lam))
    if n_y < 1 or n_z < 1:
        raise ValueError("aperture too small for a half-wavelength grid")
    n = np.arange(n_y * n_z)
    iy, iz = n // n_z, n % n_z
    pos = np.stack([np.zeros_like(n, dtype=float), iy * lam / 2.0, iz * lam / 2.0], axis=1)
    d_n0 = np.hypot(iy * lam / 2.0, iz * lam / 2.0)
    phi_n0 = np.arctan2(iy * lam / 2.0, iz * lam / 2.0)
    return ArrayLayout(
        kind=LayoutKind.PLANAR,
        positions=pos,
        aux={"index_y": iy, "index_z": iz, "n_y": n_y, "n_z": n_z,
             "d_n0": d_n0, "phi_n0": phi_n0},
    )


@dataclass(frozen=True)
class ReceiverPose:
    """Receiver placement in room coordinates: position on the floor plane
    plus the bearing of the array boresight (rad, from the room +x axis).
    The room plane coincides with the receiver's xz-plane, so a cell's
    bearing offset from boresight is the angle of arrival theta."""

    x: float = 0.0
    y: float = 0.0
    bearing: float = math.pi / 4.0

    def to_receiver_frame(self, px, py):
        """Map room coordinates to (range, theta); broadcasts over arrays."""
        dx = np.asarray(px, dtype=float) - self.x
        dy = np.asarray(py, dtype=float) - self.y
        d = np.hypot(dx, dy)
        theta = np.arctan2(dy, dx) - self.bearing
        theta = (theta + math.pi) % TWO_PI - math.pi
        return d, theta


ARCH_R_LENS = "r-lens"
ARCH_NR_LENS = "nr-lens"
ARCH_NO_LENS = "no-lens"
ARCHITECTURES = (ARCH_R_LENS, ARCH_NR_LENS, ARCH_NO_LENS)


def build_layout(arch: str, aperture: ApertureSpec, focal_length: Optional[float] = None,
                 count_override: Optional[int] = None) -> ArrayLayout:
    """Layout for one architecture; focal_length defaults to D_z."""
    if focal_length is None:
        focal_length = aperture.d_z
    if arch == ARCH_R_LENS:
        return single_antenna_layout(aperture, focal_length)
    if arch == ARCH_NR_LENS:
        return focal_arc_layout(aperture, focal_length, count_override)
    if arch == ARCH_NO_LENS:
        return planar_grid_layout(aperture)
    raise ValueError(f"unknown architecture {arch!r}")
