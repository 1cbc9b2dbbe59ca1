import math

import numpy as np
import pytest

from wavefront import ConfigError, ScenarioConfig
from wavefront.cli import main as cli_main
from wavefront.harness import (
    aperture_specs,
    fraunhofer_table,
    rmse_sweep_errors,
    run_ppp_map,
    run_rmse_map,
    run_rmse_sweep,
    run_sir_map,
    run_sir_sweep,
)

TINY = """
# desk-scale smoke configuration
apertures_m = [[0.025, 0.05]]
architectures = ["no-lens"]
sweep_distances_m = [5.0]
n_mc = 3
ml_window_d_m = 0.5
ml_step_d_m = 0.1
ml_window_theta_deg = 0.2
ml_step_theta_deg = 0.1
diff_window_d_m = 0.5
diff_step_d_m = 0.1
diff_window_theta_deg = 0.2
diff_step_theta_deg = 0.1
seed = 3
"""


class TestConfig:
    def test_defaults_validate(self):
        cfg = ScenarioConfig().validate()
        assert cfg.f0_ghz == 60.0 and len(cfg.apertures_m) == 3

    def test_parse_and_roundtrip(self):
        cfg = ScenarioConfig.parse(TINY)
        assert cfg.apertures_m == [[0.025, 0.05]]
        assert cfg.n_mc == 3
        again = ScenarioConfig.parse(cfg.to_text())
        assert again == cfg

    def test_unknown_key_rejected_with_name(self):
        with pytest.raises(ConfigError, match="not_a_key"):
            ScenarioConfig.parse("not_a_key = 1\n")

    def test_bad_type_rejected_with_field(self):
        with pytest.raises(ConfigError, match="n_mc"):
            ScenarioConfig.parse("n_mc = 2.5\n")
        with pytest.raises(ConfigError, match="architectures"):
            ScenarioConfig.parse('architectures = ["warp-drive"]\n')

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(ConfigError, match="no-such.cfg"):
            ScenarioConfig.load(tmp_path / "no-such.cfg")

    def test_wavelength_helper(self):
        cfg = ScenarioConfig()
        assert cfg.wavelength_m == pytest.approx(0.005)


class TestFraunhoferTable:
    def test_rows_and_anchor(self):
        cfg = ScenarioConfig.parse("fraunhofer_f0_ghz = [5.0, 60.0]\n"
                                   "fraunhofer_diameters_m = [0.5]\n")
        rows = fraunhofer_table(cfg)
        assert len(rows) == 2
        by_f0 = {r[0]: r for r in rows}
        assert by_f0[60e9][2] == pytest.approx(100.0)


class TestRmseSweep:
    def test_noiseless_rmse_zero(self):
        cfg = ScenarioConfig.parse(TINY + "noise_dbw = -400\n")
        ap = aperture_specs(cfg)[0]
        errs = rmse_sweep_errors(cfg, "no-lens", ap, 5.0, 0)
        np.testing.assert_allclose(errs, 0.0, atol=1e-12)

    def test_outputs_and_recomputable(self, tmp_path):
        cfg = ScenarioConfig.parse(TINY)
        paths = run_rmse_sweep(cfg, tmp_path)
        sweep = next(p for p in paths if p.name.startswith("rmse_sweep"))
        trials = next(p for p in paths if p.name.startswith("rmse_trials"))
        head, *rows = sweep.read_text().strip().splitlines()
        assert head == "d_m,theta_rad,arch,a_e,rmse_m,n_mc,seed"
        rec = rows[0].split(",")
        rmse = float(rec[4])
        terrs = [float(line.split(",")[3])
                 for line in trials.read_text().strip().splitlines()[1:]]
        assert rmse == pytest.approx(math.sqrt(np.mean(np.square(terrs))), rel=1e-12)

    def test_determinism_across_worker_counts(self, tmp_path, monkeypatch):
        cfg = ScenarioConfig.parse(TINY)
        monkeypatch.setenv("WAVEFRONT_THREADS", "1")
        p1 = run_rmse_sweep(cfg, tmp_path / "a")
        monkeypatch.setenv("WAVEFRONT_THREADS", "3")
        p2 = run_rmse_sweep(cfg, tmp_path / "b")
        for a, b in zip(p1, p2):
            assert a.read_bytes() == b.read_bytes()


class TestRmseMap:
    def test_map_excludes_rear_cells(self, tmp_path):
        # receiver in the middle looking along +x: cells behind it get NaN
        cfg = ScenarioConfig.parse(
            TINY
            + "rmse_map_size_m = 16\nrmse_map_cell_m = 8\nmap_n_mc = 2\n"
            + "rx_x_m = 8\nrx_y_m = 8\nrx_bearing_deg = 0\n"
            + "map_window_d_m = 0.4\nmap_step_d_m = 0.2\n"
            + "map_window_theta_deg = 0.4\nmap_step_theta_deg = 0.2\n"
        )
        (path,) = run_rmse_map(cfg, tmp_path)
        rows = [line.split(",") for line in path.read_text().strip().splitlines()[1:]]
        vals = {(float(x), float(y)): float(v) for x, y, v in rows}
        assert math.isnan(vals[(4.0, 4.0)])   # behind the boresight plane
        assert not math.isnan(vals[(12.0, 12.0)])


class TestSirOutputs:
    def test_sir_sweep_files_and_schema(self, tmp_path):
        cfg = ScenarioConfig.parse(
            'apertures_m = [[0.025, 0.05]]\narchitectures = ["r-lens", "no-lens"]\n'
            "sir_dd_min_m = -10\nsir_dd_max_m = 10\nsir_dd_step_m = 5\n"
        )
        paths = run_sir_sweep(cfg, tmp_path)
        names = {p.name for p in paths}
        assert "sir_sweep_r-lens_ae50.csv" in names
        assert "sir_sweep_r-lens-sinc_ae50.csv" in names
        assert "sir_sweep_r-lens-bound_ae50.csv" in names
        assert "sir_sweep_no-lens-fresnel_ae50.csv" in names
        for p in paths:
            head = p.read_text().splitlines()[0]
            assert head == "delta_d_m,arch,a_e,sir_db"

    def test_sir_map_zero_db_at_useful_cell(self, tmp_path):
        cfg = ScenarioConfig.parse(
            'apertures_m = [[0.025, 0.05]]\narchitectures = ["no-lens"]\n'
            "room_size_m = 20\nroom_cell_m = 5\nuseful_position_m = [7.5, 7.5]\n"
        )
        (path,) = run_sir_map(cfg, tmp_path)
        rows = [line.split(",") for line in path.read_text().strip().splitlines()[1:]]
        vals = {(float(x), float(y)): float(v) for x, y, v in rows}
        assert vals[(7.5, 7.5)] == pytest.approx(0.0, abs=0.1)

    def test_ppp_map_zero_intensity(self, tmp_path):
        cfg = ScenarioConfig.parse(
            'apertures_m = [[0.025, 0.05]]\narchitectures = ["r-lens"]\n'
            "ppp_intensity = 0\nppp_n_mc = 2\nppp_cell_m = 10\nroom_size_m = 20\n"
            "ppp_square_aperture_norms = []\n"
        )
        (path,) = run_ppp_map(cfg, tmp_path)
        rows = [line.split(",") for line in path.read_text().strip().splitlines()[1:]]
        for _, _, v in rows:
            assert v == "1" or v == "nan"


class TestCli:
    def test_no_command_exits_2(self, capsys):
        assert cli_main([]) == 2

    def test_unknown_command_exits_2(self, capsys):
        assert cli_main(["frobnicate"]) == 2

    def test_missing_config_exits_2_naming_path(self, capsys):
        code = cli_main(["fraunhofer", "--config", "missing-file.cfg"])
        assert code == 2
        assert "missing-file.cfg" in capsys.readouterr().err

    def test_bad_arch_flag_exits_2(self, tmp_path, capsys):
        code = cli_main(["fraunhofer", "--arch", "warp-drive", "--out", str(tmp_path)])
        assert code == 2

    def test_fraunhofer_csv(self, tmp_path, capsys):
        code = cli_main(["fraunhofer", "--out", str(tmp_path)])
        assert code == 0
        out = tmp_path / "fraunhofer.csv"
        head, *rows = out.read_text().strip().splitlines()
        assert head == "f0_hz,diameter_m,d_f_m"
        assert len(rows) == 100 * 5

    def test_seeded_runs_byte_identical(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(TINY)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli_main(["rmse-sweep", "--config", str(cfg), "--seed", "7",
                         "--out", str(a)]) == 0
        assert cli_main(["rmse-sweep", "--config", str(cfg), "--seed", "7",
                         "--out", str(b)]) == 0
        for pa in sorted(a.iterdir()):
            assert pa.read_bytes() == (b / pa.name).read_bytes()

    def test_dump_response_schema(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text('apertures_m = [[0.025, 0.05]]\narchitectures = ["nr-lens"]\n')
        assert cli_main(["dump-response", "--config", str(cfg), "--out", str(tmp_path),
                         "--d", "8.0"]) == 0
        out = tmp_path / "response_nr-lens_ae50.csv"
        head, *rows = out.read_text().strip().splitlines()
        assert head == "antenna_index,magnitude,phase_rad"
        assert len(rows) == 21  # 1 + 2 floor(D_z/lambda)


class TestGlobalGridAndScores:
    def test_global_grid_bounds(self):
        from wavefront.harness import global_search_grid

        cfg = ScenarioConfig().validate()
        grid = global_search_grid(cfg)
        assert grid.distances[0] == pytest.approx(1.0)
        assert grid.distances[-1] == pytest.approx(50.0)
        assert grid.distances[1] - grid.distances[0] == pytest.approx(0.25)
        assert math.degrees(grid.thetas[0]) == pytest.approx(-60.0)
        assert math.degrees(grid.thetas[-1]) == pytest.approx(60.0)

    def test_score_map_export(self, tmp_path):
        from wavefront.estimation import SearchGrid
        from wavefront.harness import write_score_map

        grid = SearchGrid(distances=np.array([1.0, 2.0]), thetas=np.array([0.0, 0.1]))
        scores = np.arange(4.0).reshape(2, 2)
        path = write_score_map(tmp_path / "scores.csv", grid, scores)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "d_m,theta_rad,score"
        assert len(lines) == 5


class TestEstimatorVariants:
    def test_exhaustive_mode_through_harness(self):
        cfg = ScenarioConfig.parse(TINY + "estimator_mode = \"exhaustive\"\n"
                                   "noise_dbw = -400\nn_mc = 2\n")
        ap = aperture_specs(cfg)[0]
        errs = rmse_sweep_errors(cfg, "no-lens", ap, 5.0, 0)
        np.testing.assert_allclose(errs, 0.0, atol=1e-12)

    def test_normalized_template_bank(self):
        from wavefront import SearchGrid, Snapshot, SourcePosition, build_layout, ml_estimate, template_bank
        from wavefront.harness import link_budget

        cfg = ScenarioConfig.parse(TINY)
        lb = link_budget(cfg)
        ap = aperture_specs(cfg)[0]
        lay = build_layout("no-lens", ap)
        grid = SearchGrid.around(5.0, 0.0, 0.5, 0.1, math.radians(0.2), math.radians(0.1))
        bank = template_bank("no-lens", grid, lay, lb, normalized=True)
        np.testing.assert_allclose(bank.energies, 1.0, rtol=1e-12)
        plain = template_bank("no-lens", grid, lay, lb)
        k = grid.index_of(5.0, 0.0)
        snap = Snapshot(r=plain.templates[k] * np.exp(-0.6j),
                        truth=SourcePosition(d=5.0, theta=0.0, chi=0.6), arch="no-lens")
        assert ml_estimate(snap, grid, bank, keep_scores=False).index == k


class TestRmseMapTrends:
    MAP_CFG = """
apertures_m = [[0.025, 0.05]]
architectures = ["nr-lens", "no-lens"]
noise_dbw = -88
rmse_map_size_m = 12
rmse_map_cell_m = 4
map_n_mc = 8
map_window_d_m = 2.0
map_step_d_m = 0.25
map_window_theta_deg = 3
map_step_theta_deg = 0.5
seed = 5
"""

    def _values(self, path):
        rows = [line.split(",") for line in path.read_text().strip().splitlines()[1:]]
        return {(float(x), float(y)): float(v) for x, y, v in rows}

    def test_minimum_near_receiver_and_planar_dominance(self, tmp_path):
        cfg = ScenarioConfig.parse(self.MAP_CFG)
        paths = {p.name: p for p in run_rmse_map(cfg, tmp_path)}
        nr = self._values(paths["rmse_map_nr-lens_ae50.csv"])
        nl = self._values(paths["rmse_map_no-lens_ae50.csv"])
        for vals in (nr, nl):
            finite = {k: v for k, v in vals.items() if not math.isnan(v)}
            nearest = min(finite, key=lambda k: k[0] ** 2 + k[1] ** 2)
            assert finite[nearest] == min(finite.values())
        # more antennas win: planar error never exceeds the focal-arc error
        for cell, v in nl.items():
            if not math.isnan(v):
                assert v <= nr[cell] + 1e-9


class TestSameRayVulnerability:
    def test_same_bearing_cells_below_threshold(self, tmp_path):
        # an interferer anywhere on the useful source's bearing is not
        # discriminable: the whole diagonal ray sits under the threshold
        from wavefront.harness import sir_map_values

        cfg = ScenarioConfig.parse("room_cell_m = 2.0\n")
        ap = aperture_specs(cfg)[0]
        for arch in ("r-lens", "no-lens"):
            xs, ys, sm = sir_map_values(cfg, arch, ap)
            diag = [sm[i, i] for i in range(len(xs)) if not math.isnan(sm[i, i])]
            assert max(diag) < cfg.xi_star_db


class TestWorkerEnv:
    def test_invalid_worker_count_rejected(self, monkeypatch):
        from wavefront.harness import max_workers

        monkeypatch.setenv("WAVEFRONT_THREADS", "many")
        with pytest.raises(ConfigError, match="WAVEFRONT_THREADS"):
            max_workers()
        monkeypatch.setenv("WAVEFRONT_THREADS", "2")
        assert max_workers() == 2
