"""Multi-source interference: signal-to-interference ratio under combining
matched to the useful source, closed-form approximations, and Poisson-field
coverage maps.

All SIR expressions are ratios of matched-combiner magnitudes in which the
common amplitude factor cancels, so sources are modelled with equal unit
amplitude and the results depend on geometry (phase profiles) only.  dB
values are 10 log10 of the magnitude ratio, the convention under which the
coverage threshold inequalities stay consistent.

Two evaluation paths exist for the lens architectures:

* "quadrature": exact extra distances integrated on a SurfaceGrid;
* "fresnel": second-order phases make the surface integral separable, and
  each axis reduces to Fresnel cosine/sine integrals in closed form.  This
  path costs O(1) per source pair and is the only practical one for very
  large apertures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import fresnel as _fresnel_cs

from .channel import trial_rng
from .frontends import SurfaceGrid, cis, nrlens_response_bank
from .geometry import (
    ARCH_NO_LENS,
    ARCH_NR_LENS,
    ARCH_R_LENS,
    ApertureSpec,
    ArrayLayout,
    LayoutKind,
    ReceiverPose,
    SourcePosition,
    build_layout,
    extra_distance_grid,
)

TWO_PI = 2.0 * math.pi

METHOD_QUADRATURE = "quadrature"
METHOD_FRESNEL = "fresnel"
METHOD_AUTO = "auto"

# beyond this many surface nodes the auto method switches to closed forms
_AUTO_NODE_LIMIT = 3_000_000


@dataclass(frozen=True)
class InterferenceScenario:
    """One useful source plus one or more interferers.

    worst_case_phase forces every interferer offset to equal the useful
    offset; with a single interferer the offsets only rotate the
    interference term, so this matters when several terms superpose.
    """

    useful: SourcePosition
    interferers: List[SourcePosition]
    worst_case_phase: bool = False

    def __post_init__(self):
        if len(self.interferers) < 1:
            raise ValueError("at least one interferer required")

    def relative_phases(self) -> np.ndarray:
        """exp(j (chi_u - chi_i)) per interferer."""
        if self.worst_case_phase:
            return np.ones(len(self.interferers), dtype=np.complex128)
        chi_u = self.useful.chi
        return np.exp(1j * (chi_u - np.array([p.chi for p in self.interferers])))


@dataclass(frozen=True)
class SirResult:
    sir_linear: float
    eta_u: float
    eta_int: float

    @property
    def sir_db(self) -> float:
        if self.sir_linear == math.inf:
            return math.inf
        return 10.0 * math.log10(self.sir_linear)


def _result(eta_u: float, eta_int: float) -> SirResult:
    sir = math.inf if eta_int == 0.0 else eta_u / eta_int
    return SirResult(sir_linear=sir, eta_u=eta_u, eta_int=eta_int)


@dataclass(frozen=True)
class PppModel:
    """Poisson interferer field: `intensity` is the mean interferer count
    per realization (per_area=True reads it per square metre instead);
    threshold_db is the coverage SIR threshold."""

    intensity: float = 5.0
    threshold_db: float = 10.0
    per_area: bool = False

    def mean_count(self, room_area: float) -> float:
        return self.intensity * room_area if self.per_area else self.intensity

    @property
    def threshold_linear(self) -> float:
        return 10.0 ** (self.threshold_db / 10.0)


# ---------------------------------------------------------------------------
# closed-form building blocks

def fresnel_cs(u):
    """C(u) + j S(u) (Fresnel integrals in the sin(pi t^2 / 2) convention)."""
    s, c = _fresnel_cs(u)
    return c + 1j * s


def quad_phase_integral(alpha, beta, length: float) -> np.ndarray:
    """integral_0^L exp(j (alpha t^2 + beta t)) dt, elementwise over
    broadcast alpha/beta.  Falls back to the linear-phase closed form when
    the quadratic term is negligible across the interval."""
    alpha, beta = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(beta, float))
    out = np.empty(alpha.shape, dtype=np.complex128)
    lin = np.abs(alpha) * length * length < 1e-9
    b = beta[lin]
    x = b * length / 2.0
    out[lin] = length * np.exp(1j * x) * np.sinc(x / np.pi)
    a = alpha[~lin]
    b = beta[~lin]
    sg = np.sign(a)
    root = np.sqrt(2.0 * np.abs(a) / np.pi)
    c = b / (2.0 * a)
    f1 = fresnel_cs(c * root)
    f2 = fresnel_cs((c + length) * root)
    diff = (f2.real - f1.real) + 1j * sg * (f2.imag - f1.imag)
    out[~lin] = np.exp(-1j * b * b / (4.0 * a)) * np.sqrt(np.pi / (2.0 * np.abs(a))) * diff
    return out


def lens_pair_integral(p_u: SourcePosition, d_i, theta_i, aperture: ApertureSpec) -> np.ndarray:
    """Closed-form surface integral of exp(j 2 pi (a_u - a_i) / lambda)
    under second-order phases (separable in y and z); batched over the
    interferer arrays.  Units m^2; equals A_f when the positions coincide."""
    lam = aperture.wavelength
    d_i = np.asarray(d_i, dtype=float)
    theta_i = np.asarray(theta_i, dtype=float)
    a_y = (math.pi / lam) * (1.0 / p_u.d - 1.0 / d_i)
    i_y = quad_phase_integral(a_y, np.zeros_like(a_y), aperture.d_y)
    a_z = (math.pi / lam) * (math.cos(p_u.theta) ** 2 / p_u.d - np.cos(theta_i) ** 2 / d_i)
    b_z = (TWO_PI / lam) * (np.sin(theta_i) - math.sin(p_u.theta))
    i_z = quad_phase_integral(a_z, b_z, aperture.d_z)
    return i_y * i_z


def nrlens_bank_fresnel(dists, thetas, layout: ArrayLayout,
                        aperture: ApertureSpec) -> np.ndarray:
    """Unit-amplitude focal-arc responses via the separable second-order
    phase; closed form per antenna, batched over sources: (B, N_A)."""
    lam = aperture.wavelength
    d = np.asarray(dists, dtype=float)[:, None]
    th = np.asarray(thetas, dtype=float)[:, None]
    sin_tn = layout.aux["sin_theta_n"][None, :]
    i_y = quad_phase_integral(-math.pi / (lam * d), np.zeros_like(d), aperture.d_y)
    a_z = -math.pi * np.cos(th) ** 2 / (lam * d)
    b_z = (TWO_PI / lam) * (np.sin(th) - sin_tn)
    i_z = quad_phase_integral(a_z, b_z, aperture.d_z)
    steer_const = cis(math.pi * aperture.d_z * sin_tn / lam)
    norm = 1.0 / (lam * math.sqrt(aperture.d_y * aperture.d_z))
    return i_y * i_z * steer_const * norm


# ---------------------------------------------------------------------------
# exact SIR per architecture

def _rlens_etas_quadrature(p_u: SourcePosition, d_i, theta_i, grid: SurfaceGrid,
                           chunk: int = 64) -> np.ndarray:
    lam = grid.aperture.wavelength
    y = grid.y[:, None]
    z = grid.z[None, :]
    a_u = extra_distance_grid(p_u.d, p_u.theta, y, z)
    d_i = np.asarray(d_i, dtype=float)
    theta_i = np.asarray(theta_i, dtype=float)
    out = np.empty(d_i.shape[0], dtype=np.complex128)
    for i0 in range(0, d_i.shape[0], chunk):
        sl = slice(i0, min(d_i.shape[0], i0 + chunk))
        d = d_i[sl][:, None, None]
        th = theta_i[sl][:, None, None]
        a_i = np.sqrt((d * np.cos(th)) ** 2 + y[None] ** 2 + (z[None] - d * np.sin(th)) ** 2) - d
        out[sl] = cis(TWO_PI * (a_u[None] - a_i) / lam).sum(axis=(1, 2))
    return out * grid.cell_area


def _pick_method(method: str, grid: Optional[SurfaceGrid], aperture: ApertureSpec,
                 n_sources: int) -> str:
    if method != METHOD_AUTO:
        return method
    if grid is None:
        return METHOD_FRESNEL
    nodes = len(grid.y) * len(grid.z) * max(1, n_sources)
    return METHOD_FRESNEL if nodes > _AUTO_NODE_LIMIT else METHOD_QUADRATURE


def sir_exact(scn: InterferenceScenario, arch: str, aperture: ApertureSpec,
              grid: Optional[SurfaceGrid] = None, layout: Optional[ArrayLayout] = None,
              method: str = METHOD_AUTO) -> SirResult:
    """SIR under combining matched to the useful source.

    The combiner output splits into a useful term and an interference term;
    the ratio of their magnitudes is returned together with both magnitudes.
    A coincident interferer gives SIR = 1 (0 dB) by construction.
    """
    p_u = scn.useful
    d_i = np.array([p.d for p in scn.interferers])
    t_i = np.array([p.theta for p in scn.interferers])
    phases = scn.relative_phases()

    if arch == ARCH_R_LENS:
        use = _pick_method(method, grid, aperture, len(d_i))
        if use == METHOD_QUADRATURE:
            if grid is None:
                grid = SurfaceGrid.for_aperture(aperture)
            etas = _rlens_etas_quadrature(p_u, d_i, t_i, grid)
        else:
            etas = lens_pair_integral(p_u, d_i, t_i, aperture)
        return _result(aperture.area_phys, float(abs((phases * etas).sum())))

    if arch == ARCH_NR_LENS:
        if layout is None:
            layout = build_layout(ARCH_NR_LENS, aperture)
        use = _pick_method(method, grid, aperture, len(d_i) + 1)
        if use == METHOD_QUADRATURE:
            if grid is None:
                grid = SurfaceGrid.for_aperture(aperture)
            s_u = nrlens_response_bank([p_u.d], [p_u.theta], layout, grid)[0]
            s_i = nrlens_response_bank(d_i, t_i, layout, grid)
        else:
            s_u = nrlens_bank_fresnel([p_u.d], [p_u.theta], layout, aperture)[0]
            s_i = nrlens_bank_fresnel(d_i, t_i, layout, aperture)
        eta_u = float(np.vdot(s_u, s_u).real)
        eta_int = float(abs((phases * (s_i @ s_u.conj())).sum()))
        return _result(eta_u, eta_int)

    if arch == ARCH_NO_LENS:
        if layout is None:
            layout = build_layout(ARCH_NO_LENS, aperture)
        lam = aperture.wavelength
        ya = layout.positions[:, 1]
        za = layout.positions[:, 2]
        a_u = extra_distance_grid(p_u.d, p_u.theta, ya, za)
        a_i = extra_distance_grid(d_i[:, None], t_i[:, None], ya[None, :], za[None, :])
        etas = cis(TWO_PI * (a_u[None, :] - a_i) / lam).sum(axis=1)
        return _result(float(layout.n_antennas), float(abs((phases * etas).sum())))

    raise ValueError(f"unknown architecture {arch!r}")


# ---------------------------------------------------------------------------
# single-interferer closed forms (boresight)

def radial_gamma(d: float, delta_d: float) -> float:
    """Quadratic-phase mismatch coefficient for a purely radial offset:
    gamma = (1 / 2d) (1 / (1 + delta_d/d) - 1)."""
    if d + delta_d <= 0:
        raise ValueError("interferer range d + delta_d must be positive")
    return (1.0 / (2.0 * d)) * (1.0 / (1.0 + delta_d / d) - 1.0)


def sir_rlens_sinc(d: float, delta_d: float, aperture: ApertureSpec) -> SirResult:
    """Boresight reconfigurable-lens SIR with the surface mapped to an
    equal-area circle quadrant:  SIR = 1 / |sinc(D_rho^2 gamma / lambda)|,
    sinc(x) = sin(pi x)/(pi x), D_rho^2 = 4 A_f / pi."""
    af = aperture.area_phys
    g = radial_gamma(d, delta_d)
    x = (4.0 * af / math.pi) * g / aperture.wavelength
    s = abs(np.sinc(x))
    eta_i = af * s
    return _result(af, eta_i)


def rlens_envelope_bound(d: float, delta_d: float, aperture: ApertureSpec) -> float:
    """Envelope lower bound on the boresight lens SIR:
    |2 A_f delta_d / (lambda d (d + delta_d))|.  Whenever this exceeds the
    threshold, the sinc form does too (|sinc(x)| <= 1/(pi |x|))."""
    if d + delta_d <= 0:
        raise ValueError("interferer range d + delta_d must be positive")
    af = aperture.area_phys
    return abs(2.0 * af * delta_d / (aperture.wavelength * d * (d + delta_d)))


def sir_nolens_fresnel(d: float, delta_d: float, layout: ArrayLayout,
                       wavelength: float) -> SirResult:
    """Boresight planar-array SIR with second-order phases:
    N_A / |sum_n exp(-j 2 pi gamma d_n0^2 / lambda)|."""
    if layout.kind != LayoutKind.PLANAR:
        raise ValueError("planar-grid layout required")
    g = radial_gamma(d, delta_d)
    dn0sq = layout.aux["d_n0"] ** 2
    eta = cis(-TWO_PI * g * dn0sq / wavelength).sum()
    return _result(float(layout.n_antennas), float(abs(eta)))


# ---------------------------------------------------------------------------
# Poisson-field coverage

def ppp_coverage(room_x: Sequence[float], room_y: Sequence[float], rx: ReceiverPose,
                 model: PppModel, arch: str, aperture: ApertureSpec,
                 n_mc: int, seed: int,
                 room_size: float = 40.0,
                 grid: Optional[SurfaceGrid] = None,
                 layout: Optional[ArrayLayout] = None,
                 method: str = METHOD_AUTO,
                 min_range: float = 0.5) -> np.ndarray:
    """Coverage-rate map: per cell, the useful source sits at the cell
    centre and the fraction of Monte Carlo trials with SIR above the
    threshold is recorded.  Interferer counts are Poisson with the model
    mean, positions uniform in the square room, offsets i.i.d. uniform.

    Cells closer than min_range to the receiver are flagged NaN.  Each
    (cell, trial) pair owns an independent random stream keyed on
    (seed, cell, trial), so results do not depend on evaluation order.
    """
    if layout is None and arch != ARCH_R_LENS:
        layout = build_layout(arch, aperture)
    if grid is None and method == METHOD_QUADRATURE:
        grid = SurfaceGrid.for_aperture(aperture)
    xi = model.threshold_linear
    mean_count = model.mean_count(room_size * room_size)
    cov = np.full((len(room_x), len(room_y)), np.nan)
    for ix, cx in enumerate(room_x):
        for iy, cy in enumerate(room_y):
            d_u, th_u = rx.to_receiver_frame(cx, cy)
            if d_u < min_range or abs(th_u) >= math.pi / 2.0:
                continue
            p_u = SourcePosition(d=float(d_u), theta=float(th_u))
            cell = ix * len(room_y) + iy
            hits = 0
            for m in range(n_mc):
                rng = trial_rng(seed, cell, m)
                k = int(rng.poisson(mean_count))
                if k == 0:
                    hits += 1
                    continue
                px = rng.uniform(0.0, room_size, k)
                py = rng.uniform(0.0, room_size, k)
                chis = rng.uniform(0.0, TWO_PI, k)
                d_i, t_i = rx.to_receiver_frame(px, py)
                keep = (d_i >= 1e-6) & (np.abs(t_i) < math.pi / 2.0)
                if not np.any(keep):
                    hits += 1
                    continue
                scn = InterferenceScenario(
                    useful=p_u,
                    interferers=[
                        SourcePosition(d=float(dd), theta=float(tt), chi=float(cc))
                        for dd, tt, cc in zip(d_i[keep], t_i[keep], chis[keep])
                    ],
                )
                res = sir_exact(scn, arch, aperture, grid=grid, layout=layout, method=method)
                hits += res.sir_linear > xi
            cov[ix, iy] = hits / n_mc
    return cov
