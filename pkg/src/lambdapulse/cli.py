"""Command-line interface: synthesis, propagation, sweeps, optimization.

Exit codes: 0 success, 1 domain or acceptance failure, 2 usage/parse
failure.  All CSV files use '.' decimals and LF line endings; reruns with
identical configuration produce bit-identical bytes regardless of the
worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import (
    check_constraints,
    is_boundary_safe,
    load_params,
    reference_params,
    sample_waveform,
    save_params,
    write_waveform_csv,
)
from .dynamics import SimSettings, propagate, write_trajectory_csv
from .errors import SingularGamma, StepTooCoarse
from .metrics import dwell_time, fidelity, sensitivity_report, write_sensitivity_csv
from .optimizer import ObjectiveWeights, optimize_an, write_trace_csv
from .sweeps import (
    BeamModel,
    beam_curve,
    beam_effective_fidelity,
    sweep_a2,
    sweep_c1_width,
    sweep_detuning,
    sweep_rabi,
)

FREQUENCY_CONVENTION = (
    "cyclic: user-facing kHz/MHz values are nu, converted internally as omega = 2*pi*nu"
)

SUMMARY_TOLERANCES = {
    "qs": (0.0137, 0.002),
    "dwell_us": (0.04, 0.02),
    "band_min_fidelity": 0.995,
    "plateau_p1_min": 0.94,
    "beam_fbar_w0": (0.93, 0.02),
}

REPRODUCE_FIGS = ("fig2", "fig3_4", "fig5", "fig6", "fig7", "fig8")


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get("LAMBDAPULSE_OUTDIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


class _ParamFileError(Exception):
    pass


def _load(args):
    try:
        return load_params(args.params) if args.params else reference_params()
    except (OSError, ValueError) as exc:
        raise _ParamFileError(f"cannot read parameter file: {exc}") from exc


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    p = _load(args)
    rep = check_constraints(p)
    print(f"res13 = {rep.res13:.6g}")
    print(f"res14 = {rep.res14:.6g}")
    print(f"res15_start = {rep.res15_start:.6g}")
    print(f"res15_end = {rep.res15_end:.6g}")
    ok = is_boundary_safe(p)
    print(f"boundary-safe: {'yes' if ok else 'no'}")
    return 0 if ok else 1


def cmd_synth(args) -> int:
    p = _load(args)
    w = sample_waveform(p, args.samples)
    out = _outdir(args) / "waveform.csv"
    write_waveform_csv(w, out)
    peak_p = np.max(np.abs(w.omega_p)) / (2 * np.pi)
    peak_s = np.max(np.abs(w.omega_s)) / (2 * np.pi)
    print(f"peak |omega_p|/2pi = {peak_p:.4f} MHz, peak |omega_s|/2pi = {peak_s:.4f} MHz")
    print(f"wrote {out}")
    return 0


def cmd_propagate(args) -> int:
    p = _load(args)
    settings = SimSettings(
        detuning_khz=args.detuning_khz, rabi_scale=args.rabi_scale, steps=args.steps
    )
    traj = propagate(p, settings)
    out = _outdir(args) / "trajectory.csv"
    write_trajectory_csv(traj, out)
    pops = np.abs(traj.final) ** 2
    print(
        f"P1 = {pops[0]:.4f}, Pe = {pops[1]:.6f}, P0 = {pops[2]:.4f}, "
        f"F = {fidelity(traj.final, p.theta, p.phi):.5f}"
    )
    print(f"wrote {out}")
    return 0


def cmd_sweep_detuning(args) -> int:
    p = _load(args)
    report = sweep_detuning(
        p, (args.min_khz, args.max_khz), args.points, steps=args.steps, workers=args.workers
    )
    out = _outdir(args) / "sweep_detuning.csv"
    report.write_csv(out)
    print(f"min fidelity = {report.column('fidelity').min():.5f}")
    print(f"wrote {out}")
    return 0


def cmd_sweep_rabi(args) -> int:
    p = _load(args)
    etas = np.linspace(args.eta_min, args.eta_max, args.eta_points)
    report = sweep_rabi(p, etas, _floats(args.detunings_khz), steps=args.steps, workers=args.workers)
    out = _outdir(args) / "sweep_rabi.csv"
    report.write_csv(out)
    print(f"min fidelity = {report.column('fidelity').min():.5f}")
    print(f"wrote {out}")
    return 0


def cmd_beam(args) -> int:
    p = _load(args)
    jac = not args.no_area_jacobian
    if args.curve:
        lo, hi, n = args.curve.split(":")
        ratios = np.linspace(float(lo), float(hi), int(n))
    else:
        ratios = np.array([args.r_over_w0])
    report = beam_curve(
        p,
        ratios,
        args.detuning_khz,
        n_rings=args.rings,
        area_jacobian=jac,
        steps=args.steps,
        workers=args.workers,
    )
    out = _outdir(args) / "beam.csv"
    report.write_csv(out)
    fbar = report.column("effective_fidelity")[-1]
    print(f"effective fidelity at r/w0 = {ratios[-1]:g}: {fbar:.5f}")
    print(f"wrote {out}")
    return 0


def cmd_sweep_a2(args) -> int:
    p = _load(args)
    detunings = np.linspace(args.min_khz, args.max_khz, args.points)
    report = sweep_a2(p, _floats(args.delta_fracs), detunings, steps=args.steps, workers=args.workers)
    out = _outdir(args) / "sweep_a2.csv"
    report.write_csv(out)
    print(f"wrote {out}")
    return 0


def cmd_sweep_c1(args) -> int:
    detunings = np.linspace(args.min_khz, args.max_khz, args.points)
    report = sweep_c1_width(
        _floats(args.c1_values), detunings, steps=args.steps, workers=args.workers
    )
    out = _outdir(args) / "sweep_c1.csv"
    report.write_csv(out)
    print(f"wrote {out}")
    return 0


def cmd_sensitivity(args) -> int:
    p = _load(args)
    rep = sensitivity_report(p)
    out = _outdir(args) / "sensitivity.csv"
    write_sensitivity_csv(rep, out)
    print(f"qs_numeric = {rep.qs_numeric:.5f} (epsilon = {rep.epsilon:.4f}, qs_approx = {rep.qs_approx:.5f})")
    print(f"wrote {out}")
    return 0


def cmd_optimize(args) -> int:
    p = _load(args)
    weights = ObjectiveWeights(w_band=args.w_band, w_leak=args.w_leak, w_qs=args.w_qs)
    result = optimize_an(p, weights, budget=args.budget, seed=args.seed, steps=args.steps)
    out = _outdir(args)
    save_params(result.params, out / "optimized_params.json")
    write_trace_csv(result, out / "optimize_trace.csv")
    print(
        f"best objective = {result.scalar:.6g} "
        f"(band_infid = {result.components['band_infid']:.4g}, "
        f"leak = {result.components['leak']:.4g}, qs = {result.components['qs']:.4g})"
    )
    print(f"evaluations = {result.evaluations}, budget_exhausted = {result.budget_exhausted}")
    print(f"wrote {out / 'optimized_params.json'} and {out / 'optimize_trace.csv'}")
    return 0


def _reproduce_summary(p, steps: int, workers) -> dict:
    band_grid = sweep_detuning(p, (-270.0, 270.0), 55, steps=steps, workers=workers)
    plateau_khz = np.concatenate([-np.linspace(3500, 5000, 31)[::-1], np.linspace(3500, 5000, 31)])
    plateau = [
        np.abs(
            propagate(p, SimSettings(detuning_khz=float(d), steps=steps), store_every=steps).final[0]
        )
        ** 2
        for d in plateau_khz
    ]
    traj = propagate(p, SimSettings(steps=steps))
    rep = sensitivity_report(p)
    fbar = beam_effective_fidelity(
        p, BeamModel(w0=1.0, r_max=1.0, n_rings=200), 0.0, steps=steps, workers=workers
    )
    metrics = {
        "qs": rep.qs_numeric,
        "dwell_us": dwell_time(traj),
        "band_min_fidelity": float(band_grid.column("fidelity").min()),
        "plateau_p1_min": float(np.min(plateau)),
        "beam_fbar_w0": fbar,
    }
    qs_c, qs_t = SUMMARY_TOLERANCES["qs"]
    dw_c, dw_t = SUMMARY_TOLERANCES["dwell_us"]
    fb_c, fb_t = SUMMARY_TOLERANCES["beam_fbar_w0"]
    checks = {
        "qs": abs(metrics["qs"] - qs_c) <= qs_t,
        "dwell_us": abs(metrics["dwell_us"] - dw_c) <= dw_t,
        "band_min_fidelity": metrics["band_min_fidelity"] >= SUMMARY_TOLERANCES["band_min_fidelity"],
        "plateau_p1_min": metrics["plateau_p1_min"] >= SUMMARY_TOLERANCES["plateau_p1_min"],
        "beam_fbar_w0": abs(metrics["beam_fbar_w0"] - fb_c) <= fb_t,
    }
    return {"metrics": metrics, "checks": checks}


def cmd_reproduce(args) -> int:
    p = _load(args)
    out = _outdir(args)
    skip = set(args.skip or [])
    workers = args.workers
    quick = args.quick
    steps = 8_000 if quick else 40_000

    if "fig2" not in skip:
        write_waveform_csv(sample_waveform(p, 4001), out / "fig2_waveform.csv")
        traj = propagate(p, SimSettings(steps=steps))
        write_trajectory_csv(traj, out / "fig2_populations.csv")
        print("wrote fig2_waveform.csv, fig2_populations.csv")
    if "fig3_4" not in skip:
        points = 201 if quick else 1001
        sweep_detuning(p, (-5000.0, 5000.0), points, steps=steps, workers=workers).write_csv(
            out / "fig3_4_detuning.csv"
        )
        print("wrote fig3_4_detuning.csv")
    if "fig5" not in skip:
        etas = np.linspace(-0.5, 0.5, 25 if quick else 101)
        sweep_rabi(p, etas, (0.0, 85.0, 170.0), steps=steps, workers=workers).write_csv(
            out / "fig5_rabi.csv"
        )
        print("wrote fig5_rabi.csv")
    if "fig6" not in skip:
        ratios = np.linspace(0.05, 2.0, 12 if quick else 40)
        beam_curve(
            p, ratios, 0.0, n_rings=60 if quick else 200, steps=steps, workers=workers
        ).write_csv(out / "fig6_beam.csv")
        print("wrote fig6_beam.csv")
    if "fig7" not in skip:
        detunings = np.linspace(-5000.0, 5000.0, 81 if quick else 201)
        sweep_a2(p, (-0.1, -0.05, 0.0, 0.05, 0.1), detunings, steps=steps, workers=workers).write_csv(
            out / "fig7_a2.csv"
        )
        print("wrote fig7_a2.csv")
    if "fig8" not in skip:
        detunings = np.linspace(-4000.0, 4000.0, 81 if quick else 161)
        sweep_c1_width(
            (0.2, 0.3, 0.4), detunings, theta=p.theta, phi=p.phi, t_f=p.t_f,
            steps=steps, workers=workers,
        ).write_csv(out / "fig8_c1.csv")
        print("wrote fig8_c1.csv")

    summary = _reproduce_summary(p, steps, workers)
    doc = {
        "tool_version": __version__,
        "frequency_convention": FREQUENCY_CONVENTION,
        "quick": quick,
        "steps": steps,
        "skipped": sorted(skip),
        **summary,
    }
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print("wrote summary.json")
    for name, value in summary["metrics"].items():
        flag = "ok" if summary["checks"][name] else "OUT OF TOLERANCE"
        print(f"  {name} = {value:.5g} [{flag}]")
    return 0 if all(summary["checks"].values()) else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sp, params_required: bool = False):
    sp.add_argument("--params", required=params_required, help="parameter file (JSON)")
    sp.add_argument("-o", "--outdir", default=None, help="output directory (default $LAMBDAPULSE_OUTDIR or cwd)")
    sp.add_argument("--steps", type=int, default=40_000, help="integrator step count")
    sp.add_argument("--workers", type=int, default=None, help="thread workers for grid points")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lambdapulse",
        description="Design and characterize robust lambda-system initialization pulses.",
    )
    ap.add_argument("--version", action="version", version=f"lambdapulse {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check endpoint constraints of a parameter file")
    sp.add_argument("--params", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("synth", help="synthesize and export the Rabi envelopes")
    _add_common(sp)
    sp.add_argument("--samples", type=int, default=4001)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("propagate", help="integrate the dynamics and export the trajectory")
    _add_common(sp)
    sp.add_argument("--detuning-khz", type=float, default=0.0)
    sp.add_argument("--rabi-scale", type=float, default=1.0)
    sp.set_defaults(func=cmd_propagate)

    sp = sub.add_parser("sweep-detuning", help="fidelity/population sweep over detuning")
    _add_common(sp)
    sp.add_argument("--min-khz", type=float, default=-5000.0)
    sp.add_argument("--max-khz", type=float, default=5000.0)
    sp.add_argument("--points", type=int, default=1001)
    sp.set_defaults(func=cmd_sweep_detuning)

    sp = sub.add_parser("sweep-rabi", help="fidelity sweep over fractional Rabi variation")
    _add_common(sp)
    sp.add_argument("--eta-min", type=float, default=-0.5)
    sp.add_argument("--eta-max", type=float, default=0.5)
    sp.add_argument("--eta-points", type=int, default=101)
    sp.add_argument("--detunings-khz", default="0,85,170")
    sp.set_defaults(func=cmd_sweep_rabi)

    sp = sub.add_parser("beam", help="Gaussian-beam effective fidelity")
    _add_common(sp)
    sp.add_argument("--r-over-w0", type=float, default=1.0)
    sp.add_argument("--curve", default=None, metavar="MIN:MAX:N", help="emit a curve instead of one point")
    sp.add_argument("--rings", type=int, default=200)
    sp.add_argument("--detuning-khz", type=float, default=0.0)
    sp.add_argument("--no-area-jacobian", action="store_true",
                    help="weight rings by the bare radial profile (no 2*pi*r factor)")
    sp.set_defaults(func=cmd_beam)

    sp = sub.add_parser("sweep-a2", help="waveform-error study: perturb a_2")
    _add_common(sp)
    sp.add_argument("--delta-fracs", default="-0.1,-0.05,0,0.05,0.1")
    sp.add_argument("--min-khz", type=float, default=-5000.0)
    sp.add_argument("--max-khz", type=float, default=5000.0)
    sp.add_argument("--points", type=int, default=201)
    sp.set_defaults(func=cmd_sweep_a2)

    sp = sub.add_parser("sweep-c1", help="single-Gaussian width study")
    _add_common(sp)
    sp.add_argument("--c1-values", default="0.2,0.3,0.4")
    sp.add_argument("--min-khz", type=float, default=-4000.0)
    sp.add_argument("--max-khz", type=float, default=4000.0)
    sp.add_argument("--points", type=int, default=161)
    sp.set_defaults(func=cmd_sweep_c1)

    sp = sub.add_parser("sensitivity", help="intensity-error sensitivity report")
    _add_common(sp)
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("optimize", help="optimize the sine coefficients")
    _add_common(sp)
    sp.add_argument("--budget", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--w-band", type=float, default=1.0)
    sp.add_argument("--w-leak", type=float, default=1.0)
    sp.add_argument("--w-qs", type=float, default=1.0)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("reproduce", help="emit every study CSV plus summary.json")
    _add_common(sp)
    sp.add_argument("--skip", action="append", choices=REPRODUCE_FIGS, default=None)
    sp.add_argument("--quick", action="store_true", help="coarse grids and fewer steps (testing aid)")
    sp.set_defaults(func=cmd_reproduce)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ParamFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularGamma as exc:
        print(f"error: SingularGamma: {exc}", file=sys.stderr)
        return 1
    except StepTooCoarse as exc:
        print(f"error: StepTooCoarse: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
