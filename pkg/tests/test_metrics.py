import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdapulse import (
    AnsatzParams,
    GaussianTerm,
    SimSettings,
    Trajectory,
    curvature_check,
    dwell_time,
    fidelity,
    final_state,
    perturbed_fidelity,
    propagate,
    qs_approx,
    qs_numeric,
    sensitivity_report,
    target_state,
)
from lambdapulse.metrics import write_sensitivity_csv

from conftest import FAST_STEPS

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)


def constant_gamma_params(eps, theta=np.pi / 4, width=1e4):
    # the huge width pins gamma at pi + eps across the whole window
    return AnsatzParams(
        theta=theta, phi=np.pi / 2, t_f=4.0, gaussians=(GaussianTerm(eps, 0.5, width),)
    )


def random_state(rng, with_e=True):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    if not with_e:
        v[1] = 0.0
    return v / np.linalg.norm(v)


class TestFidelity:
    def test_ket_one_against_balanced_target(self):
        assert fidelity(np.array([1, 0, 0], dtype=complex), np.pi / 4, np.pi / 2) == pytest.approx(0.5)

    def test_target_hits_one(self):
        tgt = target_state(np.pi / 4, np.pi / 2)
        assert fidelity(tgt, np.pi / 4, np.pi / 2) == pytest.approx(1.0)

    def test_global_phase_invariance(self, rng):
        psi = random_state(rng)
        f1 = fidelity(psi, 0.7, 1.1)
        f2 = fidelity(np.exp(1.234j) * psi, 0.7, 1.1)
        assert f1 == pytest.approx(f2, abs=1e-14)

    def test_no_excited_amplitude_identity(self, rng):
        # with c_e = 0 and the balanced target, F = 0.5 + Im(c1* c0)
        for _ in range(20):
            psi = random_state(rng, with_e=False)
            full = fidelity(psi, np.pi / 4, np.pi / 2)
            short = 0.5 + np.imag(np.conj(psi[0]) * psi[2])
            assert full == pytest.approx(short, abs=1e-12)

    @given(theta=angles, phi=angles, seed=st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_bounded(self, theta, phi, seed):
        psi = random_state(np.random.default_rng(seed))
        f = fidelity(psi, theta, phi)
        assert 0.0 <= f <= 1.0 + 1e-12


class TestDwellTime:
    def test_zero_ansatz_zero_dwell(self):
        p = AnsatzParams(theta=0.0, phi=0.0, t_f=4.0)
        traj = propagate(p, SimSettings(steps=1000))
        assert dwell_time(traj) == 0.0

    def test_pinned_excited_state(self):
        times = np.linspace(0.0, 2.5, 101)
        states = np.tile(np.array([0.0, 1.0, 0.0], dtype=complex), (101, 1))
        assert dwell_time(Trajectory(times=times, states=states)) == pytest.approx(2.5)

    def test_reference_dwell(self, ref):
        traj = propagate(ref, SimSettings(steps=FAST_STEPS))
        assert dwell_time(traj) == pytest.approx(0.0403, abs=5e-4)


class TestQsNumeric:
    def test_flat_ansatz_zero(self):
        p = AnsatzParams(theta=0.0, phi=0.0, t_f=4.0)
        assert qs_numeric(p) == 0.0

    def test_reference_value(self, ref):
        assert qs_numeric(ref) == pytest.approx(0.01366, abs=2e-4)

    def test_constant_gamma_exact_closed_form(self):
        # independent oracle: for gamma = pi + eps and linear beta the
        # integral closes to cos(eps)^2 sin(eps)^2 * 2 (1 - cos(theta/sin(eps)))
        for eps in (0.02, 0.05, 0.1):
            p = constant_gamma_params(eps)
            exact = (
                2.0 * (np.cos(eps) * np.sin(eps)) ** 2 * (1 - np.cos(p.theta / np.sin(eps)))
            )
            assert qs_numeric(p) == pytest.approx(exact, rel=1e-6)

    def test_quadrature_converged(self, ref):
        a = qs_numeric(ref, samples=20_001)
        b = qs_numeric(ref, samples=40_001)
        assert abs(a - b) / a < 1e-4

    def test_negative_control_much_larger(self, ref):
        bad = AnsatzParams(
            theta=ref.theta,
            phi=ref.phi,
            t_f=ref.t_f,
            gaussians=(GaussianTerm(0.3, 0.5, 0.4),),
            sines=ref.sines,
        )
        assert qs_numeric(bad) > 10 * qs_numeric(ref)

    def test_samples_validation(self, ref):
        with pytest.raises(ValueError):
            qs_numeric(ref, samples=1000)  # even count


class TestQsApprox:
    def test_spot_value(self):
        assert qs_approx(0.02, np.pi / 4) == pytest.approx(8.0e-4, abs=1e-5)

    def test_theta_zero(self):
        for eps in (0.01, 0.3, 1.0):
            assert qs_approx(eps, 0.0) == 0.0

    @given(eps=st.floats(1e-4, 2.4, allow_nan=False), theta=angles)
    @settings(max_examples=200, deadline=None)
    def test_bounded_by_four_eps_squared(self, eps, theta):
        assert 0.0 <= qs_approx(eps, theta) <= 4.0 * eps**2 + 1e-15

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            qs_approx(0.0, 1.0)
        with pytest.raises(ValueError):
            qs_approx(-0.1, 1.0)
        with pytest.raises(ValueError):
            qs_approx(np.sqrt(6.0), 1.0)


class TestPerturbedFidelity:
    def test_lambda_zero_is_one(self, ref):
        assert perturbed_fidelity(ref, 0.0) == 1.0

    def test_composition_with_qs(self, ref):
        qs = qs_numeric(ref)
        assert perturbed_fidelity(ref, 0.3) == pytest.approx(1.0 - 0.09 * qs, abs=1e-12)
        assert perturbed_fidelity(ref, 0.3) == pytest.approx(0.99877, abs=1e-4)

    def test_lambda_bound(self, ref):
        with pytest.raises(ValueError):
            perturbed_fidelity(ref, 1.5)

    def test_against_full_propagation(self, ref):
        # the propagator is the oracle for the second-order formula; the
        # quadratic approximation holds to 0.02 up to |lambda| ~ 0.25 and
        # to +0.3, while at -0.3 the quartic terms push the gap to ~0.03
        for lam in (-0.2, -0.1, 0.1, 0.2, 0.3):
            y = final_state(ref, SimSettings(rabi_scale=1.0 + lam, steps=FAST_STEPS))
            full = fidelity(y, ref.theta, ref.phi)
            assert abs(full - perturbed_fidelity(ref, lam)) <= 0.02
        y = final_state(ref, SimSettings(rabi_scale=0.7, steps=FAST_STEPS))
        gap = abs(fidelity(y, ref.theta, ref.phi) - perturbed_fidelity(ref, -0.3))
        assert 0.02 < gap < 0.04


class TestCurvatureCheck:
    def test_flat_ansatz_zero(self):
        p = AnsatzParams(theta=0.0, phi=0.0, t_f=4.0)
        assert curvature_check(p, steps=1000) == pytest.approx(0.0, abs=1e-4)

    def test_reference_agrees_with_quadrature(self, ref):
        curv = curvature_check(ref, steps=FAST_STEPS)
        qs = qs_numeric(ref)
        assert abs(curv - qs) <= max(0.2 * qs, 0.01)

    def test_larger_gaussians_larger_curvature(self, ref):
        doubled = AnsatzParams(
            theta=ref.theta,
            phi=ref.phi,
            t_f=ref.t_f,
            gaussians=tuple(
                GaussianTerm(2 * g.amplitude, g.center, g.width) for g in ref.gaussians
            ),
            sines=ref.sines,
        )
        assert curvature_check(doubled, steps=FAST_STEPS) > curvature_check(ref, steps=FAST_STEPS)


class TestSensitivityReport:
    def test_reference_report(self, ref):
        rep = sensitivity_report(ref)
        assert rep.epsilon == pytest.approx(0.15, abs=1e-12)
        assert rep.qs_numeric == pytest.approx(0.01366, abs=2e-4)
        assert 0.0 <= rep.qs_approx <= 4 * rep.epsilon**2
        assert rep.theta == ref.theta

    def test_csv(self, ref, tmp_path):
        rep = sensitivity_report(ref)
        out = tmp_path / "sens.csv"
        write_sensitivity_csv(rep, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "qs_numeric,epsilon,qs_approx,theta"
        assert len(lines) == 2
