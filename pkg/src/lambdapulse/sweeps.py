"""Parametric robustness studies: detuning, Rabi variation, beam averaging.

Every sweep propagates the full Schrodinger dynamics from |1> at each grid
point and records fidelity/population metrics.  Grid points are
independent; an optional thread pool fans them out while results are
always gathered in grid order, so the emitted CSV bytes never depend on
the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import erf

from .ansatz import AnsatzParams, single_gaussian_params
from .dynamics import SimSettings, final_state
from .metrics import fidelity

__all__ = [
    "SweepReport",
    "BeamModel",
    "sweep_detuning",
    "sweep_rabi",
    "beam_effective_fidelity",
    "beam_curve",
    "sweep_a2",
    "sweep_c1_width",
    "fidelity_halfwidth",
]


@dataclass(frozen=True)
class SweepReport:
    """Grid axes plus one record per grid point, in row-major axis order."""

    columns: tuple[str, ...]
    rows: np.ndarray
    axes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = int(np.prod([len(v) for v in self.axes.values()])) if self.axes else len(self.rows)
        if len(self.rows) != expected:
            raise ValueError(f"row count {len(self.rows)} != grid size {expected}")
        if self.rows.shape[1] != len(self.columns):
            raise ValueError("row width does not match column count")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def write_csv(self, path) -> None:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(f"{v:.12g}" for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _map_ordered(fn, items, workers: int | None):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _point_metrics(p: AnsatzParams, detuning_khz: float, rabi_scale: float, steps: int):
    y = final_state(p, SimSettings(detuning_khz=detuning_khz, rabi_scale=rabi_scale, steps=steps))
    pops = np.abs(y) ** 2
    return fidelity(y, p.theta, p.phi), pops[0], pops[1], pops[2]


def sweep_detuning(
    p: AnsatzParams,
    range_khz: tuple[float, float] = (-5000.0, 5000.0),
    points: int = 1001,
    *,
    steps: int = 40_000,
    workers: int | None = None,
) -> SweepReport:
    """Fidelity and final populations against frequency detuning."""
    if points < 2:
        raise ValueError("points must be >= 2")
    detunings = np.linspace(range_khz[0], range_khz[1], points)
    recs = _map_ordered(lambda d: _point_metrics(p, d, 1.0, steps), detunings, workers)
    rows = np.array([[d, *r] for d, r in zip(detunings, recs)])
    return SweepReport(
        columns=("detuning_khz", "fidelity", "p1", "pe", "p0"),
        rows=rows,
        axes={"detuning_khz": detunings},
    )


def sweep_rabi(
    p: AnsatzParams,
    etas,
    detunings_khz,
    *,
    steps: int = 40_000,
    workers: int | None = None,
) -> SweepReport:
    """Fidelity against fractional Rabi variation eta at fixed detunings."""
    etas = np.asarray(etas, dtype=float)
    detunings = np.asarray(detunings_khz, dtype=float)
    if np.any(1.0 + etas <= 0):
        raise ValueError("1 + eta must stay positive")
    grid = [(e, d) for e in etas for d in detunings]
    recs = _map_ordered(lambda ed: _point_metrics(p, ed[1], 1.0 + ed[0], steps), grid, workers)
    rows = np.array([[e, d, r[0]] for (e, d), r in zip(grid, recs)])
    return SweepReport(
        columns=("eta", "detuning_khz", "fidelity"),
        rows=rows,
        axes={"eta": etas, "detuning_khz": detunings},
    )


@dataclass(frozen=True)
class BeamModel:
    """Gaussian-beam discretization: waist w0, ring count, collection radius.

    The Rabi frequency follows the field profile Omega(r) proportional to
    exp(-r^2/w0^2); w0 is the 1/e^2 intensity radius.
    """

    w0: float
    r_max: float
    n_rings: int = 200

    def __post_init__(self):
        if self.n_rings < 10:
            raise ValueError(f"n_rings must be >= 10, got {self.n_rings}")
        if self.r_max <= 0 or self.w0 <= 0:
            raise ValueError("w0 and r_max must be positive")


def _ring_weights(beam: BeamModel, area_jacobian: bool) -> tuple[np.ndarray, np.ndarray]:
    """Ring edges r_i = (i/N) r_max and normalized signal weights per ring."""
    edges = beam.r_max * np.arange(beam.n_rings + 1) / beam.n_rings
    u = edges / beam.w0
    if area_jacobian:
        # integral of r * exp(-r^2/w0^2) over each ring, closed form
        cumulative = -0.5 * beam.w0**2 * np.exp(-(u**2))
    else:
        # integral of exp(-r^2/w0^2) over each ring, closed form
        cumulative = 0.5 * np.sqrt(np.pi) * beam.w0 * erf(u)
    weights = np.diff(cumulative)
    return edges[1:], weights / weights.sum()


def beam_effective_fidelity(
    p: AnsatzParams,
    beam: BeamModel,
    detuning_khz: float = 0.0,
    *,
    area_jacobian: bool = True,
    steps: int = 40_000,
    workers: int | None = None,
) -> float:
    """Signal-weighted fidelity over a Gaussian beam of radius r_max.

    Each ring is propagated with the local Rabi scale Omega(r_i)/Omega(0).
    With area_jacobian=True (default) the ring weight carries the annular
    2*pi*r factor of the collected signal; area_jacobian=False drops the
    factor and weights by the bare radial field profile.
    """
    radii, weights = _ring_weights(beam, area_jacobian)
    scales = np.exp(-((radii / beam.w0) ** 2))
    fids = _map_ordered(
        lambda s: _point_metrics(p, detuning_khz, s, steps)[0], scales, workers
    )
    return float(np.dot(weights, fids))


def beam_curve(
    p: AnsatzParams,
    r_over_w0,
    detuning_khz: float = 0.0,
    *,
    n_rings: int = 200,
    area_jacobian: bool = True,
    steps: int = 40_000,
    workers: int | None = None,
) -> SweepReport:
    """Effective fidelity as a function of the collection radius r/w0."""
    ratios = np.asarray(r_over_w0, dtype=float)
    fbars = [
        beam_effective_fidelity(
            p,
            BeamModel(w0=1.0, r_max=float(r), n_rings=n_rings),
            detuning_khz,
            area_jacobian=area_jacobian,
            steps=steps,
            workers=workers,
        )
        for r in ratios
    ]
    rows = np.array([[r, f] for r, f in zip(ratios, fbars)])
    return SweepReport(
        columns=("r_over_w0", "effective_fidelity"),
        rows=rows,
        axes={"r_over_w0": ratios},
    )


def sweep_a2(
    p: AnsatzParams,
    delta_fracs,
    detunings_khz,
    *,
    steps: int = 40_000,
    workers: int | None = None,
) -> SweepReport:
    """Waveform-generation error study: scale a_2 by (1 + delta) and re-sweep."""
    if len(p.sines) < 2:
        raise ValueError("ansatz has no a_2 coefficient to perturb")
    delta_fracs = np.asarray(delta_fracs, dtype=float)
    detunings = np.asarray(detunings_khz, dtype=float)
    rows = []
    for dfrac in delta_fracs:
        sines = list(p.sines)
        sines[1] = sines[1] * (1.0 + dfrac)
        pd = p.with_sines(sines)
        recs = _map_ordered(lambda d: _point_metrics(pd, d, 1.0, steps), detunings, workers)
        rows.extend([dfrac, d, r[0], r[3]] for d, r in zip(detunings, recs))
    return SweepReport(
        columns=("delta_frac", "detuning_khz", "fidelity", "p0"),
        rows=np.array(rows),
        axes={"delta_frac": delta_fracs, "detuning_khz": detunings},
    )


def sweep_c1_width(
    c1_values,
    detunings_khz,
    *,
    theta: float = np.pi / 4,
    phi: float = np.pi / 2,
    t_f: float = 4.0,
    steps: int = 40_000,
    workers: int | None = None,
) -> SweepReport:
    """Single-Gaussian width study on the a_2-only ansatz."""
    c1_values = np.asarray(c1_values, dtype=float)
    if np.any(c1_values <= 0):
        raise ValueError("all widths must be positive")
    detunings = np.asarray(detunings_khz, dtype=float)
    rows = []
    for c1 in c1_values:
        pc = single_gaussian_params(float(c1), theta=theta, phi=phi, t_f=t_f)
        recs = _map_ordered(lambda d: _point_metrics(pc, d, 1.0, steps), detunings, workers)
        rows.extend([c1, d, r[0]] for d, r in zip(detunings, recs))
    return SweepReport(
        columns=("c1", "detuning_khz", "fidelity"),
        rows=np.array(rows),
        axes={"c1": c1_values, "detuning_khz": detunings},
    )


def fidelity_halfwidth(detunings_khz, fidelities, level: float = 0.9) -> float:
    """First positive detuning where fidelity falls to `level`, interpolated.

    Expects a grid covering detuning >= 0 in increasing order; returns NaN
    when the curve never crosses the level.
    """
    d = np.asarray(detunings_khz, dtype=float)
    f = np.asarray(fidelities, dtype=float)
    order = np.argsort(d)
    d, f = d[order], f[order]
    mask = d >= 0
    d, f = d[mask], f[mask]
    below = np.nonzero(f < level)[0]
    if len(below) == 0 or below[0] == 0:
        return float("nan")
    i = below[0]
    frac = (level - f[i - 1]) / (f[i] - f[i - 1])
    return float(d[i - 1] + frac * (d[i] - d[i - 1]))
