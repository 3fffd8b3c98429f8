"""Render the study figures from lambdapulse CSV exports.

The renderer contains no physics: every curve is drawn exactly as stored
in the CSV files, keeping the simulation package the single source of
numerical truth.  Outputs are written as both PNG and SVG with stripped
metadata so rerendering identical inputs yields identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "lambdapulse-figures"

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "FIGURES", "load_columns", "render", "render_all", "RenderError"]

LEVEL_STYLES = {
    "p1": dict(color="tab:red", linestyle="-", label="level 1"),
    "pe": dict(color="tab:green", linestyle="-.", label="level e"),
    "p0": dict(color="tab:blue", linestyle="--", label="level 0"),
}


class RenderError(RuntimeError):
    """Raised for unusable inputs: missing columns or empty data."""


@dataclass(frozen=True)
class FigureSpec:
    """One renderable figure: id, source CSV name, required columns."""

    figure_id: str
    csv_name: str
    columns: tuple[str, ...]


def load_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read the named CSV columns; error out naming whatever is missing."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    missing = [c for c in required if c not in header]
    if missing:
        raise RenderError(f"{path.name}: missing column(s) {', '.join(missing)}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.size == 0:
        raise RenderError(f"{path.name}: no data rows")
    data = np.atleast_1d(data)
    return {c: np.asarray(data[c], dtype=float) for c in required}


def _save(fig, out_dir: Path, figure_id: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("png", "svg"):
        target = out_dir / f"{figure_id}.{ext}"
        fig.savefig(target, dpi=150, metadata={"Date": None} if ext == "svg" else {})
        written.append(target)
    plt.close(fig)
    return written


def _fig_waveform(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    t = cols["t_us"]
    two_pi = 2 * np.pi
    ax.plot(t, cols["omega_s_rad_per_us"] / two_pi, color="tab:blue", label=r"$\Omega_s$")
    ax.plot(t, cols["omega_p_rad_per_us"] / two_pi, color="tab:red", label=r"$\Omega_p$")
    ax.set_xlabel(r"time ($\mu$s)")
    ax.set_ylabel(r"$\Omega/2\pi$ (MHz)")
    ax.legend()
    return fig


def _fig_state_evolution(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, style in LEVEL_STYLES.items():
        ax.plot(cols["t_us"], cols[key], **style)
    ax.set_xlabel(r"time ($\mu$s)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    return fig


def _fig_detuning_fidelity(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cols["detuning_khz"] / 1e3, cols["fidelity"], color="tab:red")
    ax.set_xlabel("detuning (MHz)")
    ax.set_ylabel("fidelity")
    ax.set_ylim(-0.02, 1.02)
    return fig


def _fig_detuning_populations(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, style in LEVEL_STYLES.items():
        ax.plot(cols["detuning_khz"] / 1e3, cols[key], **style)
    ax.set_xlabel("detuning (MHz)")
    ax.set_ylabel("final population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    return fig


def _fig_rabi_variation(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    for d in np.unique(cols["detuning_khz"]):
        sel = cols["detuning_khz"] == d
        ax.plot(cols["eta"][sel], cols["fidelity"][sel], label=f"$\\Delta$ = {d:g} kHz")
    ax.set_xlabel(r"fractional Rabi variation $\eta$")
    ax.set_ylabel("fidelity")
    ax.legend()
    return fig


def _fig_beam(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cols["r_over_w0"], cols["effective_fidelity"], color="tab:red")
    ax.set_xlabel(r"$r/w_0$")
    ax.set_ylabel("effective fidelity")
    return fig


def _fig_a2_variation(cols):
    fig, (ax_top, ax_bot) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
    for d in np.unique(cols["delta_frac"]):
        sel = (cols["delta_frac"] == d) & (cols["detuning_khz"] >= 0)
        label = f"$\\delta$ = {d:g}"
        ax_top.plot(cols["detuning_khz"][sel] / 1e3, cols["p0"][sel], label=label)
        ax_bot.plot(cols["detuning_khz"][sel] / 1e3, cols["fidelity"][sel], label=label)
    ax_top.set_ylabel("off-resonant population in level 0")
    ax_bot.set_ylabel("fidelity")
    ax_bot.set_xlabel("detuning (MHz)")
    ax_top.legend()
    return fig


def _fig_width_study(cols):
    fig, ax = plt.subplots(figsize=(6, 4))
    for c1 in np.unique(cols["c1"]):
        sel = cols["c1"] == c1
        ax.plot(cols["detuning_khz"][sel] / 1e3, cols["fidelity"][sel], label=f"$C_1$ = {c1:g}")
    ax.set_xlabel("detuning (MHz)")
    ax.set_ylabel("fidelity")
    ax.legend()
    return fig


FIGURES = {
    "fig2a": FigureSpec("fig2a", "fig2_waveform.csv", ("t_us", "omega_p_rad_per_us", "omega_s_rad_per_us")),
    "fig2b": FigureSpec("fig2b", "fig2_populations.csv", ("t_us", "p1", "pe", "p0")),
    "fig3": FigureSpec("fig3", "fig3_4_detuning.csv", ("detuning_khz", "fidelity")),
    "fig4": FigureSpec("fig4", "fig3_4_detuning.csv", ("detuning_khz", "p1", "pe", "p0")),
    "fig5": FigureSpec("fig5", "fig5_rabi.csv", ("eta", "detuning_khz", "fidelity")),
    "fig6": FigureSpec("fig6", "fig6_beam.csv", ("r_over_w0", "effective_fidelity")),
    "fig7": FigureSpec("fig7", "fig7_a2.csv", ("delta_frac", "detuning_khz", "fidelity", "p0")),
    "fig8": FigureSpec("fig8", "fig8_c1.csv", ("c1", "detuning_khz", "fidelity")),
}

_RENDERERS = {
    "fig2a": _fig_waveform,
    "fig2b": _fig_state_evolution,
    "fig3": _fig_detuning_fidelity,
    "fig4": _fig_detuning_populations,
    "fig5": _fig_rabi_variation,
    "fig6": _fig_beam,
    "fig7": _fig_a2_variation,
    "fig8": _fig_width_study,
}


def render(figure_id: str, csv_path, out_dir) -> list[Path]:
    """Render one figure to PNG + SVG; returns the written paths."""
    if figure_id not in FIGURES:
        raise KeyError(f"unknown figure id {figure_id!r}; expected one of {sorted(FIGURES)}")
    spec = FIGURES[figure_id]
    cols = load_columns(csv_path, spec.columns)
    fig = _RENDERERS[figure_id](cols)
    return _save(fig, Path(out_dir), figure_id)


def render_all(csv_dir, out_dir) -> list[Path]:
    """Render every figure from a complete export directory."""
    csv_dir = Path(csv_dir)
    written = []
    for figure_id, spec in FIGURES.items():
        src = csv_dir / spec.csv_name
        if not src.exists():
            raise RenderError(f"missing input file {spec.csv_name} for {figure_id}")
        written.extend(render(figure_id, src, out_dir))
    return written
