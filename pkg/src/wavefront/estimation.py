"""Position estimators over a discrete search grid.

* ml_estimate: matched-filter log-likelihood with the unknown common phase
  either eliminated analytically (magnitude of the complex correlation) or
  searched exhaustively; applies to the focal-arc and planar architectures.
* rlens_scan: energy scan over lens reconfigurations; each tested
  configuration yields one scalar observation.
* differential_estimate: planar-array estimator on consecutive-antenna
  products, which cancel the common phase and reduce the search to the
  position axes only.

All estimators share the same tie-break: the first cell in distance-major,
theta-fastest order wins, so results are reproducible regardless of how the
scores were computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import LinkBudget, Snapshot, amplitude, complex_noise
from .frontends import (
    SurfaceGrid,
    fresnel_response_bank,
    nolens_response_bank,
    nrlens_response_bank,
    rlens_noiseless_scan,
)
from .geometry import (
    ARCH_NO_LENS,
    ARCH_NR_LENS,
    ArrayLayout,
    LayoutKind,
    SourcePosition,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SearchGrid:
    """Rectangular grid of test positions (distances x thetas), plus an
    optional explicit offset axis for exhaustive-offset likelihood search."""

    distances: np.ndarray
    thetas: np.ndarray
    offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        t = np.asarray(self.thetas, dtype=float)
        if d.size == 0 or t.size == 0:
            raise ValueError("search grid axes must be non-empty")
        if np.any(d <= 0):
            raise ValueError("test distances must be positive")
        if d.size > 1 and not np.all(np.diff(d) > 0):
            raise ValueError("distances must be strictly increasing")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("thetas must be strictly increasing")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "thetas", t)
        if self.offsets is not None:
            object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))

    @classmethod
    def around(cls, d0: float, theta0: float, window_d: float, step_d: float,
               window_theta: float, step_theta: float,
               d_min: float = 0.25) -> "SearchGrid":
        """Window centred on (d0, theta0); axes always contain the centre."""
        n_lo = int(math.floor((d0 - max(d_min, d0 - window_d)) / step_d))
        n_hi = int(math.floor(window_d / step_d))
        d = d0 + step_d * np.arange(-n_lo, n_hi + 1)
        m = int(math.floor(window_theta / step_theta))
        t = theta0 + step_theta * np.arange(-m, m + 1)
        return cls(distances=d, thetas=t)

    @property
    def shape(self):
        return (self.distances.size, self.thetas.size)

    @property
    def n_cells(self) -> int:
        return self.distances.size * self.thetas.size

    def cells(self):
        """Flat (distance, theta) arrays in distance-major order."""
        dd, tt = np.meshgrid(self.distances, self.thetas, indexing="ij")
        return dd.ravel(), tt.ravel()

    def index_of(self, d: float, theta: float) -> int:
        """Flat index of the nearest grid cell."""
        i = int(np.argmin(np.abs(self.distances - d)))
        j = int(np.argmin(np.abs(self.thetas - theta)))
        return i * self.thetas.size + j

    def position(self, index: int, chi: float = 0.0) -> SourcePosition:
        i, j = divmod(int(index), self.thetas.size)
        return SourcePosition(d=float(self.distances[i]), theta=float(self.thetas[j]),
                              chi=chi)


@dataclass(frozen=True)
class Estimate:
    """Winning cell of a grid search."""

    position: SourcePosition
    score: float
    index: int
    scores: Optional[np.ndarray] = None  # (n_distances, n_thetas) matrix


def _pick(grid: SearchGrid, scores: np.ndarray, chi_hat: float = 0.0,
          keep_scores: bool = True) -> Estimate:
    k = int(np.argmax(scores))  # first max wins: distance-major, theta-fastest
    return Estimate(
        position=grid.position(k, chi=chi_hat % TWO_PI),
        score=float(scores[k]),
        index=k,
        scores=scores.reshape(grid.shape) if keep_scores else None,
    )


# ---------------------------------------------------------------------------
# matched-filter ML templates

@dataclass(frozen=True)
class TemplateBank:
    """Per-cell test signals s_n(p_t) for one architecture and grid.

    templates includes the range-dependent amplitude, so the energy penalty
    E_rx(p_t)/2 is position dependent; with normalized=True every row is
    scaled to unit energy instead and the penalty becomes a constant.
    """

    arch: str
    grid: SearchGrid
    templates: np.ndarray  # (n_cells, N_A)
    normalized: bool = False

    @property
    def energies(self) -> np.ndarray:
        return np.einsum("ij,ij->i", np.abs(self.templates), np.abs(self.templates))


def template_bank(arch: str, grid: SearchGrid, layout: ArrayLayout, lb: LinkBudget,
                  quad: Optional[SurfaceGrid] = None,
                  normalized: bool = False) -> TemplateBank:
    """Build the test-signal bank for the ML estimator (focal-arc or planar)."""
    dd, tt = grid.cells()
    if arch == ARCH_NR_LENS:
        if quad is None:
            raise ValueError("focal-arc templates need a surface grid")
        unit = nrlens_response_bank(dd, tt, layout, quad)
    elif arch == ARCH_NO_LENS:
        unit = nolens_response_bank(dd, tt, layout, lb.wavelength)
    else:
        raise ValueError(f"ml templates undefined for architecture {arch!r}")
    s = unit * amplitude(lb, dd)[:, None]
    if normalized:
        s = s / np.linalg.norm(s, axis=1, keepdims=True)
    return TemplateBank(arch=arch, grid=grid, templates=s, normalized=normalized)


def ml_objective(r: np.ndarray, template: np.ndarray, offset: Optional[float] = None) -> float:
    """Log-likelihood value at one cell: sum Re{r_n s_n*(p, chi)} - E/2.
    With offset None the offset is maximized analytically."""
    corr = np.vdot(template, r)  # sum r_n conj(s_n)
    e = float(np.vdot(template, template).real)
    if offset is None:
        return float(abs(corr)) - e / 2.0
    return float((np.exp(1j * offset) * corr).real) - e / 2.0


def ml_estimate(snapshot: Snapshot, grid: SearchGrid, bank: TemplateBank,
                mode: str = "analytic", n_offsets: int = 64,
                keep_scores: bool = True) -> Estimate:
    """Grid-search ML estimate with unknown common phase.

    mode="analytic" uses max over chi in closed form, |sum r_n s_n*(p)|;
    mode="exhaustive" scans chi over grid.offsets (or n_offsets uniform
    values) as a literal three-axis search.  Both agree on the winning
    position whenever the offset grid is dense enough.
    """
    if bank.grid is not grid and bank.grid.n_cells != grid.n_cells:
        raise ValueError("template bank was built for a different grid")
    r = snapshot.r
    if r.shape[0] != bank.templates.shape[1]:
        raise ValueError("snapshot length does not match template bank")
    corr = bank.templates.conj() @ r
    energies = bank.energies
    if mode == "analytic":
        scores = np.abs(corr) - energies / 2.0
        k = int(np.argmax(scores))
        chi_hat = float(-np.angle(corr[k]))
        return _pick(grid, scores, chi_hat, keep_scores)
    if mode == "exhaustive":
        offsets = grid.offsets
        if offsets is None:
            offsets = np.arange(n_offsets) * TWO_PI / n_offsets
        rot = np.exp(1j * offsets)  # (n_chi,)
        per_offset = (corr[:, None] * rot[None, :]).real - energies[:, None] / 2.0
        scores = per_offset.max(axis=1)
        k = int(np.argmax(scores))
        chi_hat = float(offsets[int(np.argmax(per_offset[k]))])
        return _pick(grid, scores, chi_hat, keep_scores)
    raise ValueError(f"unknown offset mode {mode!r}")


# ---------------------------------------------------------------------------
# reconfigurable-lens energy scan

NOISE_PER_CONFIG = "per-config"
NOISE_SHARED = "shared"


def rlens_scan_outputs(p_true: SourcePosition, grid: SearchGrid, lb: LinkBudget,
                       quad: SurfaceGrid) -> np.ndarray:
    """Noiseless scalar outputs s0(p_t) for every grid cell (flat order).
    Reusable across Monte Carlo trials of the same truth."""
    dd, tt = grid.cells()
    return rlens_noiseless_scan(p_true, dd, tt, lb, quad)


def rlens_scan(p_true: SourcePosition, grid: SearchGrid, lb: LinkBudget,
               quad: SurfaceGrid, rng: Optional[np.random.Generator] = None,
               noise_mode: str = NOISE_PER_CONFIG,
               outputs: Optional[np.ndarray] = None,
               keep_scores: bool = True) -> Estimate:
    """Energy-scan estimate: the lens is reprogrammed per test cell and the
    cell with the largest output energy |r0(p_t)|^2 wins.

    noise_mode selects whether every reconfiguration sees an independent
    noise draw (a fresh observation per lens state) or a single shared draw;
    rng=None runs noiseless.
    """
    if outputs is None:
        outputs = rlens_scan_outputs(p_true, grid, lb, quad)
    if rng is None:
        r0 = outputs
    elif noise_mode == NOISE_PER_CONFIG:
        r0 = outputs + complex_noise(rng, lb.noise_power, outputs.size)
    elif noise_mode == NOISE_SHARED:
        r0 = outputs + complex_noise(rng, lb.noise_power, 1)[0]
    else:
        raise ValueError(f"unknown noise mode {noise_mode!r}")
    scores = np.abs(r0) ** 2
    return _pick(grid, scores, 0.0, keep_scores)


# ---------------------------------------------------------------------------
# differential planar-array estimator

def differential_pairs(v: np.ndarray) -> np.ndarray:
    """Consecutive products v_n v*_{n-1} in flat antenna order, including
    pairs that straddle planar-grid row boundaries."""
    v = np.asarray(v)
    return v[..., 1:] * np.conj(v[..., :-1])


def differential_bank(grid: SearchGrid, layout: ArrayLayout, lb: LinkBudget) -> np.ndarray:
    """Differential test signals s^d_n(p_t) from the second-order template
    model, amplitude included: (n_cells, N_A - 1)."""
    dd, tt = grid.cells()
    h = fresnel_response_bank(dd, tt, layout, lb.wavelength) * amplitude(lb, dd)[:, None]
    return differential_pairs(h)


def differential_objective(rd: np.ndarray, sd: np.ndarray) -> float:
    """sum Re{r^d_n (s^d_n)*} - E^d/2 at one cell."""
    return float((np.vdot(sd, rd)).real - 0.5 * np.vdot(sd, sd).real)


def differential_estimate(snapshot: Snapshot, grid: SearchGrid, layout: ArrayLayout,
                          lb: LinkBudget, bank: Optional[np.ndarray] = None,
                          keep_scores: bool = True) -> Estimate:
    """Offset-free estimate from consecutive-antenna products.

    The common phase cancels in r_n r*_{n-1}, so the search runs over the
    position axes only (no offset axis).  Requires a planar layout with at
    least two antennas.
    """
    if layout.kind != LayoutKind.PLANAR:
        raise ValueError("differential estimator needs a planar-grid layout")
    if snapshot.r.shape[0] < 2:
        raise ValueError("differential estimator needs at least two antennas")
    rd = differential_pairs(snapshot.r)
    if bank is None:
        bank = differential_bank(grid, layout, lb)
    scores = (bank.conj() * rd[None, :]).sum(axis=1).real - 0.5 * np.einsum(
        "ij,ij->i", np.abs(bank), np.abs(bank)
    )
    return _pick(grid, scores, 0.0, keep_scores)


def score_table(grid: SearchGrid, scores: np.ndarray):
    """Rows (d_m, theta_rad, score) for CSV export of a score matrix."""
    dd, tt = grid.cells()
    flat = np.asarray(scores).ravel()
    return [(float(d), float(t), float(s)) for d, t, s in zip(dd, tt, flat)]
