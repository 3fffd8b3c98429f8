import numpy as np
import pytest

from lambdapulse import (
    BeamModel,
    SimSettings,
    beam_curve,
    beam_effective_fidelity,
    check_constraints,
    fidelity,
    fidelity_halfwidth,
    final_state,
    single_gaussian_params,
    sweep_a2,
    sweep_c1_width,
    sweep_detuning,
    sweep_rabi,
)

from conftest import FAST_STEPS


class TestSweepDetuning:
    def test_report_shape_and_conservation(self, ref):
        rep = sweep_detuning(ref, (-300.0, 300.0), 7, steps=FAST_STEPS)
        assert rep.columns == ("detuning_khz", "fidelity", "p1", "pe", "p0")
        assert len(rep.rows) == 7
        total = rep.column("p1") + rep.column("pe") + rep.column("p0")
        assert np.max(np.abs(total - 1.0)) <= 1e-6
        assert np.all((rep.column("fidelity") >= 0) & (rep.column("fidelity") <= 1))

    def test_on_resonance_row(self, ref):
        rep = sweep_detuning(ref, (-100.0, 100.0), 3, steps=FAST_STEPS)
        assert rep.column("fidelity")[1] >= 0.997

    def test_symmetry(self, ref):
        rep = sweep_detuning(ref, (-3500.0, 3500.0), 5, steps=FAST_STEPS)
        f = rep.column("fidelity")
        assert np.max(np.abs(f - f[::-1])) <= 1e-3

    def test_points_validation(self, ref):
        with pytest.raises(ValueError):
            sweep_detuning(ref, (-10.0, 10.0), 1)

    def test_worker_count_does_not_change_bytes(self, ref, tmp_path):
        a = sweep_detuning(ref, (-200.0, 200.0), 5, steps=FAST_STEPS, workers=None)
        b = sweep_detuning(ref, (-200.0, 200.0), 5, steps=FAST_STEPS, workers=4)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        a.write_csv(pa)
        b.write_csv(pb)
        assert pa.read_bytes() == pb.read_bytes()


class TestSweepRabi:
    def test_eta_zero_matches_detuning_sweep(self, ref):
        rabi = sweep_rabi(ref, [0.0], [0.0], steps=FAST_STEPS)
        det = sweep_detuning(ref, (0.0, 1.0), 2, steps=FAST_STEPS)
        assert rabi.column("fidelity")[0] == det.column("fidelity")[0]

    def test_grid_order(self, ref):
        rep = sweep_rabi(ref, [-0.1, 0.1], [0.0, 170.0], steps=FAST_STEPS)
        assert rep.columns == ("eta", "detuning_khz", "fidelity")
        assert list(rep.column("eta")) == [-0.1, -0.1, 0.1, 0.1]
        assert list(rep.column("detuning_khz")) == [0.0, 170.0, 0.0, 170.0]

    def test_positive_variation_more_robust_at_170khz(self, ref):
        etas = [-0.3, -0.2, -0.1, 0.1, 0.2, 0.3]
        rep = sweep_rabi(ref, etas, [170.0], steps=FAST_STEPS)
        f = rep.column("fidelity")
        assert max(f[3:]) > max(f[:3])

    def test_scale_validation(self, ref):
        with pytest.raises(ValueError):
            sweep_rabi(ref, [-1.0], [0.0])


class TestBeam:
    def test_degenerate_beam_equals_center(self, ref):
        beam = BeamModel(w0=1.0, r_max=1e-3, n_rings=10)
        fbar = beam_effective_fidelity(ref, beam, steps=FAST_STEPS)
        center = fidelity(final_state(ref, SimSettings(steps=FAST_STEPS)), ref.theta, ref.phi)
        assert fbar == pytest.approx(center, abs=1e-4)

    def test_ring_refinement_converged(self, ref):
        f200 = beam_effective_fidelity(ref, BeamModel(1.0, 1.0, 200), steps=FAST_STEPS)
        f400 = beam_effective_fidelity(ref, BeamModel(1.0, 1.0, 400), steps=FAST_STEPS)
        assert abs(f200 - f400) < 1e-3

    def test_convex_combination(self, ref):
        beam = BeamModel(w0=1.0, r_max=1.0, n_rings=20)
        radii = beam.r_max * np.arange(1, 21) / 20
        fids = [
            fidelity(
                final_state(ref, SimSettings(rabi_scale=np.exp(-(r**2)), steps=FAST_STEPS)),
                ref.theta,
                ref.phi,
            )
            for r in radii
        ]
        fbar = beam_effective_fidelity(ref, beam, steps=FAST_STEPS)
        assert min(fids) <= fbar <= max(fids)

    def test_literal_weighting_sits_higher(self, ref):
        # fidelity decreases with radius, so dropping the annular area
        # factor (which shifts weight inward) must raise the average
        beam = BeamModel(w0=1.0, r_max=1.0, n_rings=60)
        with_jac = beam_effective_fidelity(ref, beam, steps=FAST_STEPS)
        literal = beam_effective_fidelity(ref, beam, area_jacobian=False, steps=FAST_STEPS)
        assert literal > with_jac

    def test_curve_report(self, ref):
        rep = beam_curve(ref, [0.25, 0.5], n_rings=20, steps=FAST_STEPS)
        assert rep.columns == ("r_over_w0", "effective_fidelity")
        assert len(rep.rows) == 2
        assert rep.column("effective_fidelity")[0] > rep.column("effective_fidelity")[1]

    def test_model_validation(self):
        with pytest.raises(ValueError):
            BeamModel(w0=1.0, r_max=1.0, n_rings=5)
        with pytest.raises(ValueError):
            BeamModel(w0=1.0, r_max=0.0)


class TestSweepA2:
    def test_zero_delta_matches_unperturbed(self, ref):
        detunings = np.linspace(-200.0, 200.0, 3)
        a2 = sweep_a2(ref, [0.0], detunings, steps=FAST_STEPS)
        det = sweep_detuning(ref, (-200.0, 200.0), 3, steps=FAST_STEPS)
        assert np.array_equal(a2.column("fidelity"), det.column("fidelity"))
        assert np.array_equal(a2.column("p0"), det.column("p0"))

    def test_leakage_grows_with_delta(self, ref):
        rep = sweep_a2(ref, [0.0, 0.05, 0.1], [3500.0], steps=FAST_STEPS)
        p0 = rep.column("p0")
        assert p0[0] < p0[1] < p0[2]

    def test_in_band_fidelity_weakly_affected(self, ref):
        detunings = np.linspace(-270.0, 270.0, 5)
        rep = sweep_a2(ref, [0.0, 0.1, -0.1], detunings, steps=FAST_STEPS)
        base = rep.rows[:5, 2]
        for k in (1, 2):
            assert np.max(np.abs(rep.rows[5 * k : 5 * (k + 1), 2] - base)) <= 0.02

    def test_requires_a2(self):
        from lambdapulse import AnsatzParams

        with pytest.raises(ValueError):
            sweep_a2(AnsatzParams(theta=0.1, phi=0.0, t_f=4.0), [0.1], [0.0])


class TestSweepC1Width:
    def test_study_params_satisfy_constraints(self):
        rep = check_constraints(single_gaussian_params(0.3))
        assert rep.res13 == 0.0
        assert rep.res14 == 0.5

    def test_single_point_single_row(self):
        rep = sweep_c1_width([0.3], [0.0], steps=FAST_STEPS)
        assert len(rep.rows) == 1
        assert rep.columns == ("c1", "detuning_khz", "fidelity")

    def test_wider_gaussian_narrower_response(self):
        detunings = np.linspace(0.0, 4000.0, 41)
        rep = sweep_c1_width([0.2, 0.3, 0.4], detunings, steps=FAST_STEPS)
        widths = []
        for k in range(3):
            block = rep.rows[41 * k : 41 * (k + 1)]
            widths.append(fidelity_halfwidth(block[:, 1], block[:, 2], 0.9))
        assert widths[0] > widths[1] > widths[2]

    def test_width_validation(self):
        with pytest.raises(ValueError):
            sweep_c1_width([0.0], [0.0])


class TestHalfwidth:
    def test_linear_interpolation(self):
        d = np.array([0.0, 100.0, 200.0])
        f = np.array([1.0, 0.95, 0.85])
        assert fidelity_halfwidth(d, f, 0.9) == pytest.approx(150.0)

    def test_no_crossing_is_nan(self):
        assert np.isnan(fidelity_halfwidth([0.0, 100.0], [0.99, 0.98], 0.9))
