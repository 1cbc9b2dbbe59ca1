import math

import numpy as np
import pytest

from wavefront import (
    SourcePosition,
    SurfaceGrid,
    build_layout,
    nolens_output,
    nrlens_output,
    rlens_output,
    rlens_profile,
)
from wavefront.channel import amplitude, baseband_gain
from wavefront.frontends import (
    architecture_output,
    fresnel_response_bank,
    nolens_response_bank,
    rlens_noiseless_scan,
)
from wavefront.geometry import extra_distance_grid

from conftest import LAM, brute_surface_integral


class TestRLens:
    def test_profile_unit_modulus(self, ap200, quad200):
        prof = rlens_profile(SourcePosition(d=7.0, theta=0.3, chi=1.0), 1.0, ap200)
        kappa = prof.kappa(quad200)
        np.testing.assert_allclose(np.abs(kappa), 1.0, rtol=1e-12)

    def test_p2_depends_only_on_geometry(self, ap200, quad200):
        p_a = rlens_profile(SourcePosition(d=5.0, theta=0.1), 0.3, ap200)
        p_b = rlens_profile(SourcePosition(d=20.0, theta=-0.4), 2.1, ap200)
        np.testing.assert_array_equal(p_a.p2(quad200), p_b.p2(quad200))

    def test_matched_gain_all_apertures(self, apertures, lb):
        for ap in apertures:
            quad = SurfaceGrid.for_aperture(ap)
            p = SourcePosition(d=10.0, theta=0.0, chi=1.7)
            prof = rlens_profile(p, p.chi, ap)
            s0 = rlens_output(p, prof, lb, quad)
            want = math.sqrt(ap.aperture_norm) * amplitude(lb, p.d)
            assert abs(s0) == pytest.approx(want, rel=5e-3)

    def test_matched_gain_ae100(self, ap100, quad100, lb):
        p = SourcePosition(d=10.0, theta=0.0, chi=0.9)
        s0 = rlens_output(p, rlens_profile(p, p.chi, ap100), lb, quad100)
        assert abs(s0) / amplitude(lb, 10.0) == pytest.approx(10.0, rel=5e-3)

    def test_normalization_integrates_constant_to_gain(self, apertures):
        # with unit profile, constant field and no focus phase the integral
        # reduces to norm * A_f = sqrt(A_e)
        for ap in apertures:
            quad = SurfaceGrid.for_aperture(ap)
            assert quad.norm * ap.area_phys == pytest.approx(math.sqrt(ap.aperture_norm))

    def test_mismatched_output_vs_brute_force(self, ap100, quad100, lb):
        truth = SourcePosition(d=8.0, theta=0.05, chi=0.4)
        test = SourcePosition(d=11.0, theta=-0.1)
        prof = rlens_profile(test, 1.3, ap100)
        got = rlens_output(truth, prof, lb, quad100)

        lam = ap100.wavelength

        def integrand(y, z):
            a_t = extra_distance_grid(test.d, test.theta, y, z)
            a_u = extra_distance_grid(truth.d, truth.theta, y, z)
            return np.exp(1j * (1.3 + 2 * np.pi * (a_t - a_u) / lam))

        ref = brute_surface_integral(integrand, ap100.d_y, ap100.d_z)
        ref = ref * quad100.norm * baseband_gain(lb, truth)
        assert got == pytest.approx(ref, rel=1e-4)

    def test_matched_filter_optimality(self, ap100, quad100, lb):
        truth = SourcePosition(d=9.0, theta=0.1, chi=2.0)
        matched = abs(rlens_output(truth, rlens_profile(truth, truth.chi, ap100), lb, quad100))
        rng = np.random.default_rng(2)
        for _ in range(25):
            test = SourcePosition(d=float(rng.uniform(2, 30)),
                                  theta=float(rng.uniform(-0.8, 0.8)))
            prof = rlens_profile(test, float(rng.uniform(0, 2 * math.pi)), ap100)
            assert abs(rlens_output(truth, prof, lb, quad100)) <= matched * (1 + 1e-6)

    def test_scan_matches_single_output(self, ap100, quad100, lb):
        truth = SourcePosition(d=6.0, theta=0.0, chi=0.8)
        ds = np.array([4.0, 6.0, 9.0])
        ts = np.array([-0.2, 0.0, 0.3])
        dd, tt = np.meshgrid(ds, ts, indexing="ij")
        got = rlens_noiseless_scan(truth, dd.ravel(), tt.ravel(), lb, quad100)
        for k, (d_t, t_t) in enumerate(zip(dd.ravel(), tt.ravel())):
            prof = rlens_profile(SourcePosition(d=float(d_t), theta=float(t_t)), 0.0, ap100)
            want = rlens_output(truth, prof, lb, quad100)
            assert got[k] == pytest.approx(want, rel=1e-10)


class TestNRLens:
    def test_far_field_focuses_on_boresight_antenna(self, ap200, quad200, lb):
        # ten Fraunhofer distances out the response concentrates on the
        # central antenna; critically-sampled beams make the others tiny
        d_far = 10 * 2 * ap200.d_z**2 / LAM
        lay = build_layout("nr-lens", ap200)
        s = nrlens_output(SourcePosition(d=d_far, theta=0.0), lay, lb, quad200)
        p = np.abs(s) ** 2
        k = int(np.argmax(p))
        assert lay.aux["sin_theta_n"][k] == 0.0
        assert p[k] / p.sum() >= 0.80

    def test_center_aligned_source_symmetry(self, ap100, quad100):
        # a source on the aperture-centre normal makes the field even about
        # the midline, so opposite focal-arc antennas see equal magnitudes;
        # checked with the independent fine-step oracle
        lay = build_layout("nr-lens", ap100)
        lam = ap100.wavelength
        cy, cz, d = ap100.d_y / 2.0, ap100.d_z / 2.0, 5.0

        def response(sin_tn):
            def integrand(y, z):
                a = np.sqrt(d * d + (y - cy) ** 2 + (z - cz) ** 2)
                zt = cz - z
                return np.exp(2j * np.pi * (zt * sin_tn - a) / lam)

            return brute_surface_integral(integrand, ap100.d_y, ap100.d_z,
                                          n_y=100, n_z=400)

        for n in (3, 11, 19):
            s_pos = response(lay.aux["sin_theta_n"][20 + n])
            s_neg = response(lay.aux["sin_theta_n"][20 - n])
            assert abs(s_neg) == pytest.approx(abs(s_pos), rel=1e-9)

    def test_boresight_symmetry_far_field(self, ap100, quad100, lb):
        # corner-referenced sources carry an odd midline phase term of order
        # D_z^2 / (2 d lambda); far out it is small and the magnitudes pair up
        d_far = 10 * 2 * ap100.d_z**2 / LAM
        lay = build_layout("nr-lens", ap100)
        s = nrlens_output(SourcePosition(d=d_far, theta=0.0), lay, lb, quad100)
        mags = np.abs(s)
        np.testing.assert_allclose(mags, mags[::-1], atol=0.05 * mags.max())

    def test_energy_bound(self, apertures, lb):
        for ap in apertures:
            quad = SurfaceGrid.for_aperture(ap)
            lay = build_layout("nr-lens", ap)
            s = nrlens_output(SourcePosition(d=7.0, theta=0.2), lay, lb, quad)
            total = (np.abs(s) ** 2).sum() / amplitude(lb, 7.0) ** 2
            assert total <= ap.aperture_norm * lay.n_antennas

    def test_against_brute_force(self, ap100, quad100, lb):
        truth = SourcePosition(d=3.0, theta=0.35, chi=1.2)
        lay = build_layout("nr-lens", ap100)
        s = nrlens_output(truth, lay, lb, quad100)
        lam = ap100.wavelength
        for n in (0, 13, 20, 27, 40):
            sin_tn = lay.aux["sin_theta_n"][n]

            def integrand(y, z):
                a = extra_distance_grid(truth.d, truth.theta, y, z)
                zt = ap100.d_z / 2.0 - z
                return np.exp(2j * np.pi * (zt * sin_tn - a) / lam)

            ref = brute_surface_integral(integrand, ap100.d_y, ap100.d_z)
            ref = ref * quad100.norm * baseband_gain(lb, truth)
            assert s[n] == pytest.approx(ref, rel=2e-3, abs=abs(s).max() * 1e-4)

    def test_quadrature_convergence_gate(self, ap200, lb):
        # halving the step moves every |s_n| by less than 1e-3 relative
        truth = SourcePosition(d=10.0, theta=0.0)
        lay = build_layout("nr-lens", ap200)
        coarse = SurfaceGrid.for_aperture(ap200)
        fine = coarse.refined(2)
        s1 = np.abs(nrlens_output(truth, lay, lb, coarse))
        s2 = np.abs(nrlens_output(truth, lay, lb, fine))
        assert np.max(np.abs(s1 - s2) / s2) < 1e-3


class TestNoLens:
    def test_reference_antenna_is_x0(self, ap100, lb):
        truth = SourcePosition(d=5.0, theta=0.3, chi=2.5)
        lay = build_layout("no-lens", ap100)
        s = nolens_output(truth, lay, lb)
        assert s[0] == pytest.approx(baseband_gain(lb, truth), rel=1e-12)

    def test_constant_amplitude(self, ap100, lb):
        truth = SourcePosition(d=5.0, theta=0.3, chi=2.5)
        s = nolens_output(truth, build_layout("no-lens", ap100), lb)
        np.testing.assert_allclose(np.abs(s), amplitude(lb, 5.0), rtol=1e-12)

    def test_boresight_phase_anchor(self, ap200, lb):
        # antenna (n_y=0, n_z=40) sits at z=0.1: same -0.62830 rad as the
        # surface-field anchor
        truth = SourcePosition(d=10.0, theta=0.0, chi=0.0)
        lay = build_layout("no-lens", ap200)
        s = nolens_output(truth, lay, lb)
        k = 40  # n_y=0, n_z=40 in z-fastest order
        assert lay.positions[k][2] == pytest.approx(0.1)
        rel = np.angle(s[k] / s[0])
        assert rel == pytest.approx(-0.6283028, abs=1e-6)

    def test_fresnel_template_phase_error_boresight(self, ap200, lb):
        # second-order templates stay within 0.05 rad of the exact phase at
        # ten aperture heights on boresight
        lay = build_layout("no-lens", ap200)
        d = 10 * ap200.d_z
        exact = nolens_response_bank([d], [0.0], lay, LAM)[0]
        fres = fresnel_response_bank([d], [0.0], lay, LAM)[0]
        err = np.abs(np.angle(exact / fres))
        assert err.max() < 0.05

    def test_fresnel_template_phase_error_wide_angle(self, ap200, lb):
        # off boresight the cubic term decays like 1/d^2; at 10 m it is
        # inside the same budget for the full angle range
        lay = build_layout("no-lens", ap200)
        for th in (-1.0, -0.4, 0.5, 1.0):
            exact = nolens_response_bank([10.0], [th], lay, LAM)[0]
            fres = fresnel_response_bank([10.0], [th], lay, LAM)[0]
            assert np.abs(np.angle(exact / fres)).max() < 0.05


class TestGlobalPhase:
    def test_offset_equivariance_array_architectures(self, ap100, quad100, lb):
        alpha = 0.9
        base = SourcePosition(d=6.0, theta=0.15, chi=0.3)
        shifted = SourcePosition(d=6.0, theta=0.15, chi=0.3 + alpha)
        for arch in ("nr-lens", "no-lens"):
            lay = build_layout(arch, ap100)
            s_a = architecture_output(arch, base, lay, lb, grid=quad100)
            s_b = architecture_output(arch, shifted, lay, lb, grid=quad100)
            np.testing.assert_allclose(s_b, s_a * np.exp(-1j * alpha), rtol=1e-10)

    def test_offset_equivariance_rlens_fixed_profile(self, ap100, quad100, lb):
        # the lens state must stay fixed while the source offset rotates
        alpha = 1.3
        base = SourcePosition(d=6.0, theta=0.15, chi=0.3)
        shifted = SourcePosition(d=6.0, theta=0.15, chi=0.3 + alpha)
        prof = rlens_profile(SourcePosition(d=7.0, theta=0.0), 0.4, ap100)
        s_a = rlens_output(base, prof, lb, quad100)
        s_b = rlens_output(shifted, prof, lb, quad100)
        assert s_b == pytest.approx(s_a * np.exp(-1j * alpha), rel=1e-10)
