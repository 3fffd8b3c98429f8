"""Three-level Hamiltonian, dynamical invariant, and Schrodinger propagation.

Basis ordering is (c1, ce, c0) for levels |1>, |e>, |0>.  The resonant
Hamiltonian (hbar = 1, Rabi frequencies in rad/us) is

    H0 = 1/2 [[0,        Omega_p,  0               ],
              [Omega_p,  0,        Omega_s e^{-i phi}],
              [0,        Omega_s e^{i phi},        0]]

A common ion detuning Delta enters as a single diagonal term on |e>,
H = H0 + Delta |e><e|, which preserves two-photon resonance.  User-facing
detunings are cyclic frequencies in kHz and convert via omega = 2 pi nu.

Propagation uses fixed-step classical RK4 with the envelopes evaluated
analytically at every stage time (no waveform interpolation); the inner
loop is JIT-compiled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numba import njit
from scipy.integrate import quad

from .ansatz import AnsatzParams, eval_beta, eval_derivatives, eval_gamma, synth_rabi
from .errors import SingularGamma, StepTooCoarse

KHZ_TO_RAD_PER_US = 2.0 * np.pi * 1e-3
NORM_TOL = 1e-6

__all__ = [
    "KHZ_TO_RAD_PER_US",
    "SimSettings",
    "Trajectory",
    "InvariantSpec",
    "ket_one",
    "hamiltonian",
    "invariant",
    "eigenstate_phi0",
    "eigenstate_phi0_at",
    "invariance_residual",
    "lr_phase_alpha_plus",
    "propagate",
    "final_state",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class SimSettings:
    """Propagation settings: detuning in kHz (cyclic), Rabi multiplier, steps."""

    detuning_khz: float = 0.0
    rabi_scale: float = 1.0
    steps: int = 40_000

    def __post_init__(self):
        if self.rabi_scale < 0:
            raise ValueError(f"rabi_scale must be >= 0, got {self.rabi_scale}")
        if self.steps < 100:
            raise ValueError(f"steps must be >= 100, got {self.steps}")


@dataclass(frozen=True)
class InvariantSpec:
    """Constant frequency scale of the invariant; cancels in all derived quantities."""

    omega0: float = 1.0

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")


@dataclass(frozen=True)
class Trajectory:
    """Stored state history; states[k] is (c1, ce, c0) at times[k]."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        """(n, 3) array of |c1|^2, |ce|^2, |c0|^2."""
        return np.abs(self.states) ** 2


def ket_one() -> np.ndarray:
    """The initial qubit level |1>."""
    return np.array([1.0, 0.0, 0.0], dtype=complex)


def hamiltonian(omega_p: float, omega_s: float, phi: float, delta: float = 0.0) -> np.ndarray:
    """3x3 Hermitian Hamiltonian; all frequency arguments in rad/us."""
    return 0.5 * np.array(
        [
            [0.0, omega_p, 0.0],
            [omega_p, 2.0 * delta, omega_s * np.exp(-1j * phi)],
            [0.0, omega_s * np.exp(1j * phi), 0.0],
        ],
        dtype=complex,
    )


def invariant(gamma: float, beta: float, phi: float, spec: InvariantSpec = InvariantSpec()) -> np.ndarray:
    """Dynamical invariant of the resonant Hamiltonian (hbar = 1)."""
    cg, sg = np.cos(gamma), np.sin(gamma)
    cb, sb = np.cos(beta), np.sin(beta)
    ep, em = np.exp(1j * phi), np.exp(-1j * phi)
    return 0.5 * spec.omega0 * np.array(
        [
            [0.0, cg * sb, -1j * sg * em],
            [cg * sb, 0.0, cg * cb * em],
            [1j * sg * ep, cg * cb * ep, 0.0],
        ],
        dtype=complex,
    )


def _invariant_time_derivative(
    gamma: float, beta: float, dgamma: float, dbeta: float, phi: float, spec: InvariantSpec
) -> np.ndarray:
    cg, sg = np.cos(gamma), np.sin(gamma)
    cb, sb = np.cos(beta), np.sin(beta)
    ep, em = np.exp(1j * phi), np.exp(-1j * phi)
    d12 = -dgamma * sg * sb + dbeta * cg * cb
    d23 = -dgamma * sg * cb - dbeta * cg * sb
    return 0.5 * spec.omega0 * np.array(
        [
            [0.0, d12, -1j * dgamma * cg * em],
            [d12, 0.0, d23 * em],
            [1j * dgamma * cg * ep, d23 * ep, 0.0],
        ],
        dtype=complex,
    )


def eigenstate_phi0(gamma: float, beta: float, phi: float) -> np.ndarray:
    """Zero-eigenvalue transport eigenstate of the invariant (unit norm)."""
    return np.array(
        [
            np.cos(gamma) * np.cos(beta),
            -1j * np.sin(gamma),
            -np.cos(gamma) * np.sin(beta) * np.exp(1j * phi),
        ],
        dtype=complex,
    )


def eigenstate_phi0_at(t: float, p: AnsatzParams) -> np.ndarray:
    """Transport eigenstate evaluated on an ansatz at time t."""
    return eigenstate_phi0(eval_gamma(t, p), eval_beta(t, p), p.phi)


def invariance_residual(t: float, p: AnsatzParams, spec: InvariantSpec = InvariantSpec()) -> float:
    """Frobenius norm of dI/dt - i [I, H0] at time t (resonant, unscaled pulse)."""
    g = eval_gamma(t, p)
    b = eval_beta(t, p)
    dg, db = eval_derivatives(t, p)
    omega_p, omega_s = synth_rabi(t, p)
    mat_i = invariant(g, b, p.phi, spec)
    mat_didt = _invariant_time_derivative(g, b, dg, db, p.phi, spec)
    mat_h = hamiltonian(omega_p, omega_s, p.phi)
    residual = mat_didt - 1j * (mat_i @ mat_h - mat_h @ mat_i)
    return float(np.linalg.norm(residual))


def lr_phase_alpha_plus(t: float, p: AnsatzParams, *, guard: float = 1e-9) -> float:
    """Lewis-Riesenfeld phase of the +branch: -int_0^t beta'/sin(gamma) dt'."""
    if t == 0.0:
        return 0.0
    probe = np.linspace(0.0, t, 2001)
    _, db_probe = eval_derivatives(probe, p)
    sin_probe = np.sin(eval_gamma(probe, p))
    if np.any((np.abs(sin_probe) < guard) & (db_probe != 0.0)):
        raise SingularGamma("gamma crosses pi on the integration interval")

    def integrand(tp):
        _, db = eval_derivatives(tp, p)
        if db == 0.0:
            return 0.0
        return db / np.sin(eval_gamma(tp, p))

    val, _ = quad(integrand, 0.0, t, limit=200)
    return float(-val)


# ---------------------------------------------------------------------------
# RK4 propagation
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _rk4_kernel(omega_p, omega_s, scale, delta, e_m, e_p, y0, n_steps, dt, stride, out):  # pragma: no cover
    c1, ce, c0 = y0[0], y0[1], y0[2]
    out[0, 0] = c1
    out[0, 1] = ce
    out[0, 2] = c0
    row = 1
    for k in range(n_steps):
        j0 = 2 * k
        wp0 = scale * omega_p[j0]
        ws0 = scale * omega_s[j0]
        wpm = scale * omega_p[j0 + 1]
        wsm = scale * omega_s[j0 + 1]
        wp1 = scale * omega_p[j0 + 2]
        ws1 = scale * omega_s[j0 + 2]

        k1_1 = -0.5j * wp0 * ce
        k1_e = -1j * (0.5 * wp0 * c1 + delta * ce + 0.5 * ws0 * e_m * c0)
        k1_0 = -0.5j * ws0 * e_p * ce

        a1 = c1 + 0.5 * dt * k1_1
        ae = ce + 0.5 * dt * k1_e
        a0 = c0 + 0.5 * dt * k1_0
        k2_1 = -0.5j * wpm * ae
        k2_e = -1j * (0.5 * wpm * a1 + delta * ae + 0.5 * wsm * e_m * a0)
        k2_0 = -0.5j * wsm * e_p * ae

        a1 = c1 + 0.5 * dt * k2_1
        ae = ce + 0.5 * dt * k2_e
        a0 = c0 + 0.5 * dt * k2_0
        k3_1 = -0.5j * wpm * ae
        k3_e = -1j * (0.5 * wpm * a1 + delta * ae + 0.5 * wsm * e_m * a0)
        k3_0 = -0.5j * wsm * e_p * ae

        a1 = c1 + dt * k3_1
        ae = ce + dt * k3_e
        a0 = c0 + dt * k3_0
        k4_1 = -0.5j * wp1 * ae
        k4_e = -1j * (0.5 * wp1 * a1 + delta * ae + 0.5 * ws1 * e_m * a0)
        k4_0 = -0.5j * ws1 * e_p * ae

        c1 = c1 + (dt / 6.0) * (k1_1 + 2.0 * k2_1 + 2.0 * k3_1 + k4_1)
        ce = ce + (dt / 6.0) * (k1_e + 2.0 * k2_e + 2.0 * k3_e + k4_e)
        c0 = c0 + (dt / 6.0) * (k1_0 + 2.0 * k2_0 + 2.0 * k3_0 + k4_0)

        if (k + 1) % stride == 0:
            out[row, 0] = c1
            out[row, 1] = ce
            out[row, 2] = c0
            row += 1


@lru_cache(maxsize=32)
def _stage_envelopes(p: AnsatzParams, steps: int):
    """Envelopes at the RK4 stage times t_j = j * dt/2, j = 0 .. 2*steps."""
    t = np.linspace(0.0, p.t_f, 2 * steps + 1)
    return synth_rabi(t, p)


def propagate(
    p: AnsatzParams,
    settings: SimSettings = SimSettings(),
    initial: np.ndarray | None = None,
    *,
    store_every: int | None = None,
) -> Trajectory:
    """Integrate the Schrodinger equation across the pulse window.

    The initial state must be normalized.  store_every controls the stride
    between stored states (default keeps roughly 4000 samples); the final
    state is always stored.  Raises StepTooCoarse when the norm drifts by
    more than 1e-6 anywhere on the stored grid.
    """
    y0 = ket_one() if initial is None else np.asarray(initial, dtype=complex)
    if abs(np.linalg.norm(y0) - 1.0) > 1e-6:
        raise ValueError("initial state must be normalized")

    steps = settings.steps
    if store_every is None:
        store_every = max(1, steps // 4000)
    if steps % store_every != 0:
        raise ValueError(f"store_every={store_every} must divide steps={steps}")

    omega_p, omega_s = _stage_envelopes(p, steps)
    delta = KHZ_TO_RAD_PER_US * settings.detuning_khz
    dt = p.t_f / steps
    n_rows = steps // store_every + 1
    out = np.empty((n_rows, 3), dtype=complex)
    _rk4_kernel(
        omega_p,
        omega_s,
        float(settings.rabi_scale),
        float(delta),
        np.exp(-1j * p.phi),
        np.exp(1j * p.phi),
        y0,
        steps,
        dt,
        store_every,
        out,
    )
    times = np.linspace(0.0, p.t_f, n_rows)
    drift = np.max(np.abs(np.linalg.norm(out, axis=1) - 1.0))
    if drift > NORM_TOL:
        raise StepTooCoarse(
            f"norm drift {drift:.3e} exceeds {NORM_TOL:g}; increase steps (got {steps})"
        )
    return Trajectory(times=times, states=out)


def final_state(
    p: AnsatzParams,
    settings: SimSettings = SimSettings(),
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Final state only; storage-free variant of propagate."""
    return propagate(p, settings, initial, store_every=settings.steps).final


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export: t_us,p1,pe,p0,re_c1,im_c1,re_ce,im_ce,re_c0,im_c0."""
    pops = traj.populations()
    lines = ["t_us,p1,pe,p0,re_c1,im_c1,re_ce,im_ce,re_c0,im_c0"]
    for t, pp, st in zip(traj.times, pops, traj.states):
        lines.append(
            f"{t:.12g},{pp[0]:.12g},{pp[1]:.12g},{pp[2]:.12g},"
            f"{st[0].real:.12g},{st[0].imag:.12g},"
            f"{st[1].real:.12g},{st[1].imag:.12g},"
            f"{st[2].real:.12g},{st[2].imag:.12g}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
