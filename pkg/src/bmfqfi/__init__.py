"""Entanglement dynamics of a driven two-mode boson model.

Four tiers share one x-polarised starting point: exact Dicke-basis
propagation, a nine-moment beyond-mean-field closure, Holstein-Primakoff
fluctuations, and the classical kicked map. QFI, entanglement depth,
break times and an adiabatic sweep are built on top.
"""
from .analytic import f_b_oat_exact, f_q_oat_exact, t_c
from .bmf import BmfState, bmf_initial, covariance_b, f_b, integrate_bmf
from .breaktime import (
    BreakTimeRecord,
    ScalingFit,
    breaktime_scan,
    prefactor_lyapunov_fit,
    scaling_fit,
    t_break,
)
from .chaos import BlochVector, LyapunovResult, integrate_mf, lyapunov, lyapunov_map, poincare_section
from .errors import (
    BmfqfiError,
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    FitError,
    GridError,
    IntegratorError,
    ParameterError,
    StepSizeError,
)
from .evolve import evolve_ramp, evolve_states, qfi_trajectory
from .hp import HpMoments, f_hp, integrate_hp, n_exc
from .qpt import SweepResult, adiabatic_sweep, pseudo_critical_point
from .spin import (
    DriveProtocol,
    ModelParams,
    coherent_state,
    covariance_q,
    entanglement_depth,
    qfi,
    spin_moments,
)

__version__ = "0.1.0"
