"""Robust qubit-initialization pulses for three-level lambda systems.

Designs driving envelopes by invariant-based inverse engineering and
quantifies their robustness against frequency detuning, off-resonant
excitation, and laser-intensity inhomogeneity by direct Schrodinger
simulation and perturbation-theory sensitivity analysis.
"""

from .ansatz import (
    AnsatzParams,
    ConstraintReport,
    GaussianTerm,
    Waveform,
    check_constraints,
    eval_beta,
    eval_derivatives,
    eval_gamma,
    is_boundary_safe,
    load_params,
    reference_params,
    sample_waveform,
    save_params,
    single_gaussian_params,
    synth_rabi,
)
from .dynamics import (
    InvariantSpec,
    SimSettings,
    Trajectory,
    eigenstate_phi0,
    eigenstate_phi0_at,
    final_state,
    hamiltonian,
    invariance_residual,
    invariant,
    ket_one,
    lr_phase_alpha_plus,
    propagate,
)
from .errors import SingularGamma, StepTooCoarse
from .metrics import (
    SensitivityReport,
    curvature_check,
    dwell_time,
    fidelity,
    perturbed_fidelity,
    qs_approx,
    qs_numeric,
    sensitivity_report,
    target_state,
)
from .optimizer import ObjectiveWeights, OptimizationResult, objective, optimize_an
from .sweeps import (
    BeamModel,
    SweepReport,
    beam_curve,
    beam_effective_fidelity,
    fidelity_halfwidth,
    sweep_a2,
    sweep_c1_width,
    sweep_detuning,
    sweep_rabi,
)

__version__ = "0.1.0"
