"""Receiver front ends: map a source position to the noiseless antenna-domain
signal vector for the three architectures.

* reconfigurable lens (r-lens): programmable phase profile focuses a
  hypothesised wavefront onto a single antenna; the observable is a scalar.
* fixed lens (nr-lens): fixed profile maps incidence angle to a focal-arc
  position sampled by a small antenna array.
* bare array (no-lens): half-wavelength planar grid, all processing at
  signal level.

Surface integrals are evaluated with a midpoint product rule: the integrand
is sampled mid-cell and each z-cell is multiplied by sin(x)/x of half the
local linear phase advance, which integrates the dominant oscillation
(antenna steering + wavefront slope) exactly and leaves only the slowly
varying curvature residue to the midpoint rule.  The y-direction phase
gradient is bounded by D_y/d and needs no correction at the ranges of
interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import LinkBudget, baseband_gain
from .geometry import (
    ApertureSpec,
    ArrayLayout,
    LayoutKind,
    SourcePosition,
    extra_distance_dz,
    extra_distance_grid,
)

TWO_PI = 2.0 * math.pi

# cells per source chunk in batched bank builders; keeps the (chunk, ny, nz)
# temporaries within a few tens of MB
_CHUNK = 128


def cis(x: np.ndarray) -> np.ndarray:
    """exp(j x) assembled from cos/sin into a preallocated complex array
    (markedly faster than np.exp on complex input)."""
    out = np.empty(np.shape(x), dtype=np.complex128)
    np.cos(x, out=out.real)
    np.sin(x, out=out.imag)
    return out


def _sinc(x: np.ndarray) -> np.ndarray:
    """sin(x)/x with sinc(0) = 1."""
    return np.sinc(x / np.pi)


@dataclass(frozen=True)
class SurfaceGrid:
    """Midpoint quadrature grid over the receiving surface.

    Steps are at most `fraction` of a wavelength (default 1/8) in both axes;
    node counts round up so the cells tile the aperture exactly.
    """

    aperture: ApertureSpec
    y: np.ndarray
    z: np.ndarray
    step_y: float
    step_z: float

    @classmethod
    def for_aperture(cls, aperture: ApertureSpec, fraction: float = 0.125) -> "SurfaceGrid":
        if not 0 < fraction <= 0.5:
            raise ValueError("step fraction must be in (0, 0.5]")
        target = aperture.wavelength * fraction
        ny = max(1, int(math.ceil(aperture.d_y / target)))
        nz = max(1, int(math.ceil(aperture.d_z / target)))
        hy, hz = aperture.d_y / ny, aperture.d_z / nz
        return cls(
            aperture=aperture,
            y=(np.arange(ny) + 0.5) * hy,
            z=(np.arange(nz) + 0.5) * hz,
            step_y=hy,
            step_z=hz,
        )

    def refined(self, factor: int = 2) -> "SurfaceGrid":
        """Same aperture with steps divided by `factor` (convergence checks)."""
        ny, nz = len(self.y) * factor, len(self.z) * factor
        hy, hz = self.aperture.d_y / ny, self.aperture.d_z / nz
        return SurfaceGrid(
            aperture=self.aperture,
            y=(np.arange(ny) + 0.5) * hy,
            z=(np.arange(nz) + 0.5) * hz,
            step_y=hy,
            step_z=hz,
        )

    @property
    def cell_area(self) -> float:
        return self.step_y * self.step_z

    @property
    def norm(self) -> float:
        """Front-end normalization 1 / (lambda sqrt(D_y D_z)): matched
        combining over the full surface then yields sqrt(A_e)."""
        ap = self.aperture
        return 1.0 / (ap.wavelength * math.sqrt(ap.d_y * ap.d_z))


# ---------------------------------------------------------------------------
# reconfigurable lens

@dataclass(frozen=True)
class RLensProfile:
    """Programmable lens state targeting one test position / test offset.

    The profile factorizes as kappa = P1 * P2: P1 undoes the hypothesised
    incident phase (spherical-to-planar), P2 is the fixed planar-to-focus
    term of the focal geometry.  Both are unit modulus everywhere.
    """

    test_position: SourcePosition
    test_offset: float
    aperture: ApertureSpec
    focal_length: float

    @property
    def focal_point(self) -> np.ndarray:
        ap = self.aperture
        return np.array([-self.focal_length, ap.d_y / 2.0, ap.d_z / 2.0])

    def p1(self, grid: SurfaceGrid) -> np.ndarray:
        """Spherical-to-planar term exp(j (chi_t + 2 pi a_t / lambda))."""
        lam = self.aperture.wavelength
        a_t = extra_distance_grid(
            self.test_position.d, self.test_position.theta,
            grid.y[:, None], grid.z[None, :],
        )
        return cis(self.test_offset + TWO_PI * a_t / lam)

    def p2(self, grid: SurfaceGrid) -> np.ndarray:
        """Planar-to-focus term exp(j 2 pi sqrt(F^2 + d_c^2) / lambda)."""
        return cis(self.focus_path_phase(grid))

    def focus_path_phase(self, grid: SurfaceGrid) -> np.ndarray:
        ap = self.aperture
        dc2 = (grid.y[:, None] - ap.d_y / 2.0) ** 2 + (grid.z[None, :] - ap.d_z / 2.0) ** 2
        return TWO_PI * np.sqrt(self.focal_length**2 + dc2) / ap.wavelength

    def kappa(self, grid: SurfaceGrid) -> np.ndarray:
        return self.p1(grid) * self.p2(grid)


def rlens_profile(test_position: SourcePosition, test_offset: float,
                  aperture: ApertureSpec, focal_length: Optional[float] = None) -> RLensProfile:
    if focal_length is None:
        focal_length = aperture.d_z
    return RLensProfile(test_position=test_position, test_offset=test_offset,
                        aperture=aperture, focal_length=focal_length)


def rlens_output(p_true: SourcePosition, profile: RLensProfile, lb: LinkBudget,
                 grid: SurfaceGrid) -> complex:
    """Single-antenna output of the programmed lens:

        s0 = norm * integral kappa(y,z) h(y,z) exp(-j Psi0(y,z)) dy dz

    with Psi0 the focus path phase.  When the profile matches the true
    position and offset the integrand collapses to the constant A_pl and
    s0 = sqrt(A_e) A_pl; any mismatch strictly reduces the magnitude.
    """
    ap = profile.aperture
    lam = ap.wavelength
    a_true = extra_distance_grid(p_true.d, p_true.theta, grid.y[:, None], grid.z[None, :])
    h = baseband_gain(lb, p_true) * cis(-TWO_PI * a_true / lam)
    integrand = profile.kappa(grid) * h * cis(-profile.focus_path_phase(grid))
    # local linear phase advance per z-cell (P2 and the focus path cancel)
    y_mid = ap.d_y / 2.0
    slope = extra_distance_dz(profile.test_position.d, profile.test_position.theta,
                              y_mid, grid.z) - extra_distance_dz(p_true.d, p_true.theta,
                                                                 y_mid, grid.z)
    corr = _sinc((TWO_PI / lam) * slope * grid.step_z / 2.0)
    return complex((integrand * corr[None, :]).sum() * grid.cell_area * grid.norm)


def rlens_noiseless_scan(p_true: SourcePosition, dists: np.ndarray, thetas: np.ndarray,
                         lb: LinkBudget, grid: SurfaceGrid,
                         test_offset: float = 0.0) -> np.ndarray:
    """Noiseless lens outputs s0(p_t) for a batch of test positions (paired
    arrays).  Equivalent to rlens_output per cell but chunk-vectorized."""
    ap = grid.aperture
    lam = ap.wavelength
    y2 = grid.y[:, None] ** 2
    z = grid.z[None, :]
    a_true = extra_distance_grid(p_true.d, p_true.theta, grid.y[:, None], z)
    y_mid = ap.d_y / 2.0
    slope_true = extra_distance_dz(p_true.d, p_true.theta, y_mid, grid.z)

    dists = np.asarray(dists, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(dists.shape[0], dtype=np.complex128)
    for i0 in range(0, dists.shape[0], _CHUNK):
        sl = slice(i0, min(dists.shape[0], i0 + _CHUNK))
        d = dists[sl][:, None, None]
        th = thetas[sl][:, None, None]
        zs = d * np.sin(th)
        a_t = np.sqrt((d * np.cos(th)) ** 2 + y2[None] + (z[None] - zs) ** 2) - d
        m = cis(TWO_PI * (a_t - a_true[None]) / lam)
        dist_mid = np.sqrt((d[..., 0] * np.cos(th[..., 0])) ** 2 + y_mid**2
                           + (grid.z[None, :] - zs[..., 0]) ** 2)
        slope = (grid.z[None, :] - zs[..., 0]) / dist_mid - slope_true[None, :]
        corr = _sinc((TWO_PI / lam) * slope * grid.step_z / 2.0)
        out[sl] = (m.sum(axis=1) * corr).sum(axis=1)
    return out * grid.cell_area * grid.norm * baseband_gain(lb, p_true) * np.exp(1j * test_offset)


# ---------------------------------------------------------------------------
# fixed lens with focal-arc array

def _reduced_field(dists, thetas, grid: SurfaceGrid):
    """Per-source y-reduced surface field sum_y exp(-j 2 pi a / lambda) h_y
    plus the mid-aperture wavefront slope, chunked over sources.

    Returns (field (B, nz), slope (B, nz))."""
    lam = grid.aperture.wavelength
    y = grid.y[None, :, None]
    z = grid.z[None, None, :]
    y_mid = grid.aperture.d_y / 2.0
    dists = np.asarray(dists, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    nb, nz = dists.shape[0], len(grid.z)
    field = np.empty((nb, nz), dtype=np.complex128)
    slope = np.empty((nb, nz), dtype=float)
    for i0 in range(0, nb, _CHUNK):
        sl = slice(i0, min(nb, i0 + _CHUNK))
        d = dists[sl][:, None, None]
        th = thetas[sl][:, None, None]
        zs = d * np.sin(th)
        a = np.sqrt((d * np.cos(th)) ** 2 + y * y + (z - zs) ** 2) - d
        field[sl] = cis(-TWO_PI * a / lam).sum(axis=1) * grid.step_y
        d2, th2 = dists[sl][:, None], thetas[sl][:, None]
        zs2 = d2 * np.sin(th2)
        dist_mid = np.sqrt((d2 * np.cos(th2)) ** 2 + y_mid**2 + (grid.z[None, :] - zs2) ** 2)
        slope[sl] = (grid.z[None, :] - zs2) / dist_mid
    return field, slope


def nrlens_response_bank(dists, thetas, layout: ArrayLayout, grid: SurfaceGrid) -> np.ndarray:
    """Unit-amplitude focal-arc responses for a batch of source positions:
    (B, N_A) matrix of

        s~_n = norm * integral exp(-j 2 pi a / lambda)
                               exp(+j 2 pi (D_z/2 - z) sin(theta_n) / lambda) dy dz

    Sources deep inside the lens near field (range below twice the long
    aperture side) are outside the model's validated regime and raise a
    warning.
    """
    if layout.kind != LayoutKind.FOCAL_ARC:
        raise ValueError("focal-arc layout required")
    if np.min(np.asarray(dists, dtype=float)) < 2.0 * grid.aperture.d_z:
        import warnings

        warnings.warn("source range below 2 D_z: fixed-lens response is extrapolated",
                      stacklevel=2)
    ap = grid.aperture
    lam = ap.wavelength
    sin_tn = layout.aux["sin_theta_n"]
    z_tilde = ap.d_z / 2.0 - grid.z
    steer = cis(TWO_PI * z_tilde[None, :] * sin_tn[:, None] / lam)  # (Na, nz)

    field, slope = _reduced_field(dists, thetas, grid)
    nb = field.shape[0]
    out = np.empty((nb, len(sin_tn)), dtype=np.complex128)
    k_half = (TWO_PI / lam) * grid.step_z / 2.0
    # the combined linear advance couples the wavefront slope with each
    # steering angle, so contract per (cell-chunk, antenna) and keep the
    # temporaries at (chunk, nz)
    for i0 in range(0, nb, _CHUNK):
        sl = slice(i0, min(nb, i0 + _CHUNK))
        fs = field[sl]
        ss = slope[sl]
        for n, s_n in enumerate(sin_tn):
            corr = _sinc(-k_half * (ss + s_n))
            out[sl, n] = (fs * steer[n][None, :] * corr).sum(axis=1)
    return out * grid.step_z * grid.norm


def nrlens_output(p_true: SourcePosition, layout: ArrayLayout, lb: LinkBudget,
                  grid: SurfaceGrid) -> np.ndarray:
    """Noiseless focal-arc antenna vector for one source (includes x0)."""
    bank = nrlens_response_bank([p_true.d], [p_true.theta], layout, grid)
    return bank[0] * baseband_gain(lb, p_true)


# ---------------------------------------------------------------------------
# bare planar array

def nolens_response_bank(dists, thetas, layout: ArrayLayout, wavelength: float,
                         chunk: int = 4096) -> np.ndarray:
    """Unit-amplitude planar-array responses exp(-j 2 pi a(p_n, p) / lambda)
    for a batch of source positions: (B, N_A).  Uses exact per-antenna
    distances; no surface integral is involved."""
    if layout.kind != LayoutKind.PLANAR:
        raise ValueError("planar-grid layout required")
    ya = layout.positions[:, 1][None, :]
    za = layout.positions[:, 2][None, :]
    dists = np.asarray(dists, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    nb = dists.shape[0]
    out = np.empty((nb, layout.n_antennas), dtype=np.complex128)
    for i0 in range(0, nb, chunk):
        sl = slice(i0, min(nb, i0 + chunk))
        d = dists[sl][:, None]
        th = thetas[sl][:, None]
        a = np.sqrt((d * np.cos(th)) ** 2 + ya * ya + (za - d * np.sin(th)) ** 2) - d
        out[sl] = cis(-TWO_PI * a / wavelength)
    return out


def nolens_output(p_true: SourcePosition, layout: ArrayLayout, lb: LinkBudget) -> np.ndarray:
    """Noiseless planar-array vector: x0 exp(-j 2 pi a(p_n, p) / lambda)
    with a evaluated at the exact antenna positions."""
    bank = nolens_response_bank([p_true.d], [p_true.theta], layout, lb.wavelength)
    return bank[0] * baseband_gain(lb, p_true)


def fresnel_response_bank(dists, thetas, layout: ArrayLayout, wavelength: float) -> np.ndarray:
    """Unit-amplitude planar-array responses under the second-order phase:

        exp(-j 2 pi (n_y^2 + n_z^2 cos^2 theta) lambda / (8 d))
        * exp(+j pi n_z sin theta)

    This is the template model of the differential estimator."""
    if layout.kind != LayoutKind.PLANAR:
        raise ValueError("planar-grid layout required")
    iy = layout.aux["index_y"][None, :]
    iz = layout.aux["index_z"][None, :]
    d = np.asarray(dists, dtype=float)[:, None]
    th = np.asarray(thetas, dtype=float)[:, None]
    ct2 = np.cos(th) ** 2
    phase = (-TWO_PI * (iy * iy + iz * iz * ct2) * wavelength / (8.0 * d)
             + math.pi * iz * np.sin(th))
    return cis(phase)


def architecture_output(arch: str, p_true: SourcePosition, layout: ArrayLayout,
                        lb: LinkBudget, grid: Optional[SurfaceGrid] = None) -> np.ndarray:
    """Noiseless antenna vector for any architecture; the r-lens output is
    the matched-profile scalar wrapped in a length-1 array."""
    from .geometry import ARCH_NO_LENS, ARCH_NR_LENS, ARCH_R_LENS

    if arch == ARCH_R_LENS:
        if grid is None:
            raise ValueError("r-lens output needs a surface grid")
        profile = rlens_profile(p_true, p_true.chi, grid.aperture)
        return np.array([rlens_output(p_true, profile, lb, grid)])
    if arch == ARCH_NR_LENS:
        if grid is None:
            raise ValueError("nr-lens output needs a surface grid")
        return nrlens_output(p_true, layout, lb, grid)
    if arch == ARCH_NO_LENS:
        return nolens_output(p_true, layout, lb)
    raise ValueError(f"unknown architecture {arch!r}")
