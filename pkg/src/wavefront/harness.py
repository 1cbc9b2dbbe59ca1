"""Experiment orchestration: Monte Carlo sweeps and maps, SIR experiments,
CSV emission.

Determinism contract: every Monte Carlo trial owns a counter-based random
stream keyed on (global seed, experiment, architecture, cell/distance,
trial), so outputs are byte-identical for a given (config, seed) regardless
of evaluation order or worker count.  Streams are keyed on the distance /
cell index but not on the aperture, which pairs the draws across apertures
for paired comparisons.

Every emitted CSV starts with a header row naming its columns; files carry
no timestamps.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .channel import LinkBudget, Snapshot, complex_noise, draw_offset, trial_rng
from .config import ConfigError, ScenarioConfig
from .estimation import (
    NOISE_PER_CONFIG,
    NOISE_SHARED,
    SearchGrid,
    differential_bank,
    differential_estimate,
    ml_estimate,
    rlens_scan,
    rlens_scan_outputs,
    template_bank,
)
from .frontends import SurfaceGrid, architecture_output, nrlens_response_bank, nolens_response_bank
from .geometry import (
    ARCH_NO_LENS,
    ARCH_NR_LENS,
    ARCH_R_LENS,
    ApertureSpec,
    ReceiverPose,
    SourcePosition,
    build_layout,
    fraunhofer_distance,
)
from .interference import (
    METHOD_FRESNEL,
    METHOD_QUADRATURE,
    InterferenceScenario,
    PppModel,
    ppp_coverage,
    rlens_envelope_bound,
    sir_exact,
    sir_nolens_fresnel,
    sir_rlens_sinc,
)

TWO_PI = 2.0 * math.pi

# experiment codes for random-stream keying
_EXP_SWEEP = 1
_EXP_MAP = 2

# estimator labels (the differential shares the planar front end)
EST_DIFFERENTIAL = "no-lens-diff"

WORKERS_ENV = "WAVEFRONT_THREADS"


def max_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def _run_jobs(fn, jobs: Sequence):
    """Evaluate fn over jobs on the worker pool, preserving job order."""
    workers = max_workers()
    if workers == 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------------------
# config-derived objects

def link_budget(cfg: ScenarioConfig) -> LinkBudget:
    return LinkBudget.from_db(cfg.eirp_dbm, cfg.noise_dbw, cfg.f0_hz, cfg.c_m_per_s)


def aperture_specs(cfg: ScenarioConfig) -> List[ApertureSpec]:
    return [ApertureSpec.from_carrier(dy, dz, cfg.f0_hz, cfg.c_m_per_s)
            for dy, dz in cfg.apertures_m]


def surface_grid(cfg: ScenarioConfig, ap: ApertureSpec) -> SurfaceGrid:
    return SurfaceGrid.for_aperture(ap, cfg.quadrature_step_fraction)


def receiver_pose(cfg: ScenarioConfig) -> ReceiverPose:
    return ReceiverPose(x=cfg.rx_x_m, y=cfg.rx_y_m, bearing=math.radians(cfg.rx_bearing_deg))


def ae_label(ap: ApertureSpec) -> str:
    return f"{ap.aperture_norm:.0f}"


def _arch_code(label: str) -> int:
    return {ARCH_R_LENS: 0, ARCH_NR_LENS: 1, ARCH_NO_LENS: 2, EST_DIFFERENTIAL: 3}[label]


# search windows -------------------------------------------------------------

def ml_search_grid(cfg: ScenarioConfig, d0: float, theta0: float) -> SearchGrid:
    window = cfg.ml_window_d_m if cfg.ml_window_d_m is not None else max(1.5, 0.25 * d0)
    step = cfg.ml_step_d_m if cfg.ml_step_d_m is not None else (0.01 if d0 <= 12.0 else 0.025)
    return SearchGrid.around(d0, theta0, window, step,
                             math.radians(cfg.ml_window_theta_deg),
                             math.radians(cfg.ml_step_theta_deg))


def rlens_search_grid(cfg: ScenarioConfig, d0: float, theta0: float) -> SearchGrid:
    window = cfg.rlens_window_d_m if cfg.rlens_window_d_m is not None else max(5.0, 0.25 * d0)
    return SearchGrid.around(d0, theta0, window, cfg.rlens_step_d_m,
                             math.radians(cfg.rlens_window_theta_deg),
                             math.radians(cfg.rlens_step_theta_deg))


def diff_search_grid(cfg: ScenarioConfig, d0: float, theta0: float) -> SearchGrid:
    window = cfg.diff_window_d_m if cfg.diff_window_d_m is not None else max(10.0, 0.5 * d0)
    return SearchGrid.around(d0, theta0, window, cfg.diff_step_d_m,
                             math.radians(cfg.diff_window_theta_deg),
                             math.radians(cfg.diff_step_theta_deg))


def map_search_grid(cfg: ScenarioConfig, d0: float, theta0: float) -> SearchGrid:
    return SearchGrid.around(d0, theta0, cfg.map_window_d_m, cfg.map_step_d_m,
                             math.radians(cfg.map_window_theta_deg),
                             math.radians(cfg.map_step_theta_deg))


def global_search_grid(cfg: ScenarioConfig) -> SearchGrid:
    """The scenario-wide test-position grid (score-surface exports and
    open-loop searches)."""
    d = np.arange(cfg.grid_d_min_m, cfg.grid_d_max_m + 1e-9, cfg.grid_d_step_m)
    t = np.radians(np.arange(cfg.grid_theta_min_deg, cfg.grid_theta_max_deg + 1e-9,
                             cfg.grid_theta_step_deg))
    return SearchGrid(distances=d, thetas=t)


def write_score_map(path: Path, grid: SearchGrid, scores: np.ndarray) -> Path:
    """Score-surface export: one row per test cell."""
    from .estimation import score_table

    return write_csv(path, ["d_m", "theta_rad", "score"], score_table(grid, scores))


# ---------------------------------------------------------------------------
# CSV helpers

def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


# ---------------------------------------------------------------------------
# experiments

def fraunhofer_table(cfg: ScenarioConfig) -> List[Tuple[float, float, float]]:
    """Far-field onset per (carrier, diameter): rows (f0_hz, diameter_m, d_f_m)."""
    rows = []
    for f0_ghz in cfg.fraunhofer_f0_ghz:
        lam = cfg.c_m_per_s / (f0_ghz * 1e9)
        for diam in cfg.fraunhofer_diameters_m:
            rows.append((f0_ghz * 1e9, diam, fraunhofer_distance(diam, lam)))
    return rows


def run_fraunhofer(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    rows = fraunhofer_table(cfg)
    return [write_csv(out_dir / "fraunhofer.csv", ["f0_hz", "diameter_m", "d_f_m"], rows)]


def _trial_errors_ml(cfg, lb, arch, ap, grid, quad, truth, n_mc, stream):
    """Per-trial position errors of the ML estimator at a fixed truth."""
    layout = build_layout(arch, ap, cfg.focal_length_m)
    bank = template_bank(arch, grid, layout, lb, quad=quad)
    k_truth = grid.index_of(truth.d, truth.theta)
    base = bank.templates[k_truth]
    errs = np.empty(n_mc)
    truth_xy = truth.plane_xy()
    for m in range(n_mc):
        rng = trial_rng(cfg.seed, *stream, m)
        chi = draw_offset(rng)
        r = base * np.exp(-1j * chi) + complex_noise(rng, lb.noise_power, base.size)
        snap = Snapshot(r=r, truth=truth, arch=arch, seed=cfg.seed)
        est = ml_estimate(snap, grid, bank, mode=cfg.estimator_mode,
                          n_offsets=cfg.n_offsets, keep_scores=False)
        errs[m] = np.linalg.norm(est.position.plane_xy() - truth_xy)
    return errs


def _trial_errors_rlens(cfg, lb, ap, grid, quad, truth, n_mc, stream):
    outputs = rlens_scan_outputs(truth, grid, lb, quad)
    errs = np.empty(n_mc)
    truth_xy = truth.plane_xy()
    mode = NOISE_SHARED if cfg.rlens_noise_mode == "shared" else NOISE_PER_CONFIG
    for m in range(n_mc):
        rng = trial_rng(cfg.seed, *stream, m)
        chi = draw_offset(rng)
        est = rlens_scan(truth, grid, lb, quad, rng=rng, noise_mode=mode,
                         outputs=outputs * np.exp(-1j * chi), keep_scores=False)
        errs[m] = np.linalg.norm(est.position.plane_xy() - truth_xy)
    return errs


def _trial_errors_diff(cfg, lb, ap, grid, truth, n_mc, stream):
    layout = build_layout(ARCH_NO_LENS, ap)
    bank = differential_bank(grid, layout, lb)
    base = nolens_response_bank([truth.d], [truth.theta], layout, lb.wavelength)[0]
    from .channel import amplitude

    base = base * amplitude(lb, truth.d)
    errs = np.empty(n_mc)
    truth_xy = truth.plane_xy()
    for m in range(n_mc):
        rng = trial_rng(cfg.seed, *stream, m)
        chi = draw_offset(rng)
        r = base * np.exp(-1j * chi) + complex_noise(rng, lb.noise_power, base.size)
        snap = Snapshot(r=r, truth=truth, arch=ARCH_NO_LENS, seed=cfg.seed)
        est = differential_estimate(snap, grid, layout, lb, bank=bank, keep_scores=False)
        errs[m] = np.linalg.norm(est.position.plane_xy() - truth_xy)
    return errs


def sweep_estimators(cfg: ScenarioConfig) -> List[str]:
    labels = [a for a in cfg.architectures]
    if cfg.include_differential and ARCH_NO_LENS in cfg.architectures:
        labels.append(EST_DIFFERENTIAL)
    return labels


def rmse_sweep_errors(cfg: ScenarioConfig, label: str, ap: ApertureSpec,
                      d0: float, d_index: int) -> np.ndarray:
    """Per-trial errors for one (estimator label, aperture, distance)."""
    lb = link_budget(cfg)
    theta0 = math.radians(cfg.sweep_theta_deg)
    truth = SourcePosition(d=d0, theta=theta0)
    quad = surface_grid(cfg, ap)
    stream = (_EXP_SWEEP, _arch_code(label), d_index)
    if label == ARCH_R_LENS:
        grid = rlens_search_grid(cfg, d0, theta0)
        return _trial_errors_rlens(cfg, lb, ap, grid, quad, truth, cfg.n_mc, stream)
    if label == EST_DIFFERENTIAL:
        grid = diff_search_grid(cfg, d0, theta0)
        return _trial_errors_diff(cfg, lb, ap, grid, truth, cfg.n_mc, stream)
    grid = ml_search_grid(cfg, d0, theta0)
    return _trial_errors_ml(cfg, lb, label, ap, grid, quad, truth, cfg.n_mc, stream)


def run_rmse_sweep(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    """Range sweep at fixed angle of arrival: one RMSE record per
    (estimator, aperture, distance), with per-trial error logs."""
    aps = aperture_specs(cfg)
    labels = sweep_estimators(cfg)
    theta0 = math.radians(cfg.sweep_theta_deg)
    jobs = [(label, ap, d0, i) for label in labels for ap in aps
            for i, d0 in enumerate(cfg.sweep_distances_m)]
    results = _run_jobs(lambda j: rmse_sweep_errors(cfg, *j), jobs)

    paths = []
    for label in labels:
        for ap in aps:
            records, trial_rows = [], []
            for (jlabel, jap, d0, i), errs in zip(jobs, results):
                if jlabel != label or jap is not ap:
                    continue
                rmse = float(np.sqrt(np.mean(errs**2)))
                records.append((d0, theta0, label, ap.aperture_norm, rmse, cfg.n_mc, cfg.seed))
                trial_rows.extend((d0, theta0, m, float(e)) for m, e in enumerate(errs))
            tag = f"{label}_ae{ae_label(ap)}"
            paths.append(write_csv(out_dir / f"rmse_sweep_{tag}.csv",
                                   ["d_m", "theta_rad", "arch", "a_e", "rmse_m", "n_mc", "seed"],
                                   records))
            paths.append(write_csv(out_dir / f"rmse_trials_{tag}.csv",
                                   ["d_m", "theta_rad", "trial", "err_m"],
                                   trial_rows))
    return paths


def _map_cells(cfg: ScenarioConfig, size: float, cell: float):
    xs = np.arange(cell / 2.0, size, cell)
    return xs, xs.copy()


def run_rmse_map(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    """Positioning error map over the room: the source visits each cell;
    cells behind the array plane or on top of the receiver are excluded."""
    aps = aperture_specs(cfg)
    lb = link_budget(cfg)
    pose = receiver_pose(cfg)
    xs, ys = _map_cells(cfg, cfg.rmse_map_size_m, cfg.rmse_map_cell_m)
    cells = [(ix, iy, x, y) for ix, x in enumerate(xs) for iy, y in enumerate(ys)]
    paths = []
    for arch in cfg.architectures:
        for ap in aps:
            quad = surface_grid(cfg, ap)

            def one_cell(job):
                ix, iy, x, y = job
                d, th = pose.to_receiver_frame(x, y)
                d, th = float(d), float(th)
                if d < 1.0 or abs(th) >= math.pi / 2.0:
                    return math.nan
                truth = SourcePosition(d=d, theta=th)
                grid = map_search_grid(cfg, d, th)
                stream = (_EXP_MAP, _arch_code(arch), ix * len(ys) + iy)
                if arch == ARCH_R_LENS:
                    errs = _trial_errors_rlens(cfg, lb, ap, grid, quad, truth,
                                               cfg.map_n_mc, stream)
                else:
                    errs = _trial_errors_ml(cfg, lb, arch, ap, grid, quad, truth,
                                            cfg.map_n_mc, stream)
                return float(np.sqrt(np.mean(errs**2)))

            values = _run_jobs(one_cell, cells)
            rows = [(x, y, v) for (ix, iy, x, y), v in zip(cells, values)]
            tag = f"{arch}_ae{ae_label(ap)}"
            paths.append(write_csv(out_dir / f"rmse_map_{tag}.csv",
                                   ["x_m", "y_m", "value"], rows))
    return paths


# interference ---------------------------------------------------------------

def sir_radial_sweep(cfg: ScenarioConfig, arch: str, ap: ApertureSpec,
                     deltas: np.ndarray) -> np.ndarray:
    """Exact SIR (dB) against a single same-bearing interferer offset by
    delta_d from the useful source at the sweep distance."""
    d0 = cfg.sir_sweep_d_m
    quad = surface_grid(cfg, ap)
    useful = SourcePosition(d=d0, theta=0.0)
    out = np.empty(len(deltas))
    for i, dd in enumerate(deltas):
        scn = InterferenceScenario(
            useful=useful,
            interferers=[SourcePosition(d=d0 + dd, theta=0.0)],
            worst_case_phase=cfg.sir_worst_case,
        )
        out[i] = sir_exact(scn, arch, ap, grid=quad, method=METHOD_QUADRATURE).sir_db
    return out


def run_sir_sweep(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    """Radial interferer sweeps: exact SIR per architecture plus the
    boresight closed forms and the envelope bound for cross-checks."""
    aps = aperture_specs(cfg)
    d0 = cfg.sir_sweep_d_m
    deltas = np.arange(cfg.sir_dd_min_m, cfg.sir_dd_max_m + 1e-9, cfg.sir_dd_step_m)
    deltas = deltas[d0 + deltas > 0.25]
    header = ["delta_d_m", "arch", "a_e", "sir_db"]
    paths = []
    for ap in aps:
        ae = ap.aperture_norm
        for arch in cfg.architectures:
            vals = sir_radial_sweep(cfg, arch, ap, deltas)
            rows = [(float(dd), arch, ae, v) for dd, v in zip(deltas, vals)]
            paths.append(write_csv(out_dir / f"sir_sweep_{arch}_ae{ae_label(ap)}.csv",
                                   header, rows))
        # closed forms
        sinc_rows, bound_rows = [], []
        for dd in deltas:
            s = sir_rlens_sinc(d0, float(dd), ap)
            sinc_rows.append((float(dd), "r-lens-sinc", ae, s.sir_db))
            b = rlens_envelope_bound(d0, float(dd), ap)
            bound_rows.append((float(dd), "r-lens-bound", ae,
                               10.0 * math.log10(b) if b > 0 else -math.inf))
        paths.append(write_csv(out_dir / f"sir_sweep_r-lens-sinc_ae{ae_label(ap)}.csv",
                               header, sinc_rows))
        paths.append(write_csv(out_dir / f"sir_sweep_r-lens-bound_ae{ae_label(ap)}.csv",
                               header, bound_rows))
        if ARCH_NO_LENS in cfg.architectures:
            layout = build_layout(ARCH_NO_LENS, ap)
            rows = [(float(dd), "no-lens-fresnel", ae,
                     sir_nolens_fresnel(d0, float(dd), layout, ap.wavelength).sir_db)
                    for dd in deltas]
            paths.append(write_csv(out_dir / f"sir_sweep_no-lens-fresnel_ae{ae_label(ap)}.csv",
                                   header, rows))
    return paths


def sir_map_values(cfg: ScenarioConfig, arch: str, ap: ApertureSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-interferer SIR map: the interferer visits each room cell while
    the useful source stays fixed.  Returns (xs, ys, sir_db grid)."""
    pose = receiver_pose(cfg)
    xs, ys = _map_cells(cfg, cfg.room_size_m, cfg.room_cell_m)
    ux, uy = cfg.useful_position_m
    du, thu = pose.to_receiver_frame(ux, uy)
    useful = SourcePosition(d=float(du), theta=float(thu))
    quad = surface_grid(cfg, ap)
    layout = None if arch == ARCH_R_LENS else build_layout(arch, ap, cfg.focal_length_m)

    XX, YY = np.meshgrid(xs, ys, indexing="ij")
    d_i, t_i = pose.to_receiver_frame(XX.ravel(), YY.ravel())
    valid = (d_i > 0.25) & (np.abs(t_i) < math.pi / 2.0)

    sir = np.full(d_i.shape, np.nan)
    dv, tv = d_i[valid], t_i[valid]
    if arch == ARCH_R_LENS:
        from .interference import _rlens_etas_quadrature

        etas = _rlens_etas_quadrature(useful, dv, tv, quad)
        sir[valid] = ap.area_phys / np.abs(etas)
    elif arch == ARCH_NR_LENS:
        s_u = nrlens_response_bank([useful.d], [useful.theta], layout, quad)[0]
        s_i = nrlens_response_bank(dv, tv, layout, quad)
        sir[valid] = float(np.vdot(s_u, s_u).real) / np.abs(s_i @ s_u.conj())
    else:
        s_u = nolens_response_bank([useful.d], [useful.theta], layout, ap.wavelength)[0]
        s_i = nolens_response_bank(dv, tv, layout, ap.wavelength)
        sir[valid] = layout.n_antennas / np.abs(s_i @ s_u.conj())
    with np.errstate(divide="ignore"):
        sir_db = 10.0 * np.log10(sir)
    return xs, ys, sir_db.reshape(len(xs), len(ys))


def run_sir_map(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    paths = []
    for arch in cfg.architectures:
        for ap in aperture_specs(cfg):
            xs, ys, grid = sir_map_values(cfg, arch, ap)
            rows = [(float(x), float(y), float(grid[ix, iy]))
                    for ix, x in enumerate(xs) for iy, y in enumerate(ys)]
            tag = f"{arch}_ae{ae_label(ap)}"
            paths.append(write_csv(out_dir / f"sir_map_{tag}.csv",
                                   ["x_m", "y_m", "value"], rows))
    return paths


def ppp_aperture_specs(cfg: ScenarioConfig) -> List[ApertureSpec]:
    """Sweep apertures plus the configured large square apertures."""
    aps = aperture_specs(cfg)
    lam = cfg.wavelength_m
    for ae in cfg.ppp_square_aperture_norms:
        side = math.sqrt(ae) * lam
        aps.append(ApertureSpec.from_carrier(side, side, cfg.f0_hz, cfg.c_m_per_s))
    return aps


def run_ppp_map(cfg: ScenarioConfig, out_dir: Path) -> List[Path]:
    """Coverage-rate maps under the Poisson interferer field.  Lens
    architectures use the separable closed-form path (exact quadrature is
    impractical for the large apertures and both agree within a fraction of
    a dB at the bench scale)."""
    pose = receiver_pose(cfg)
    model = PppModel(intensity=cfg.ppp_intensity, threshold_db=cfg.xi_star_db,
                     per_area=cfg.ppp_per_area)
    xs, ys = _map_cells(cfg, cfg.room_size_m, cfg.ppp_cell_m)
    paths = []
    for arch in cfg.architectures:
        for ap in ppp_aperture_specs(cfg):
            method = METHOD_FRESNEL if arch in (ARCH_R_LENS, ARCH_NR_LENS) else METHOD_QUADRATURE
            cov = ppp_coverage(xs, ys, pose, model, arch, ap,
                               n_mc=cfg.ppp_n_mc, seed=cfg.seed,
                               room_size=cfg.room_size_m, method=method)
            rows = [(float(x), float(y), float(cov[ix, iy]))
                    for ix, x in enumerate(xs) for iy, y in enumerate(ys)]
            tag = f"{arch}_ae{ae_label(ap)}"
            paths.append(write_csv(out_dir / f"coverage_ppp_{tag}.csv",
                                   ["x_m", "y_m", "value"], rows))
    return paths


def run_dump_response(cfg: ScenarioConfig, out_dir: Path, d: float,
                      theta_deg: float) -> List[Path]:
    """Noiseless per-antenna response magnitudes/phases for one source."""
    lb = link_budget(cfg)
    truth = SourcePosition(d=d, theta=math.radians(theta_deg))
    paths = []
    for arch in cfg.architectures:
        for ap in aperture_specs(cfg):
            layout = build_layout(arch, ap, cfg.focal_length_m)
            quad = surface_grid(cfg, ap)
            s = architecture_output(arch, truth, layout, lb, grid=quad)
            rows = [(n, float(abs(v)), float(np.angle(v))) for n, v in enumerate(s)]
            tag = f"{arch}_ae{ae_label(ap)}"
            paths.append(write_csv(out_dir / f"response_{tag}.csv",
                                   ["antenna_index", "magnitude", "phase_rad"], rows))
    return paths
