"""Spectral simulation of the Loschmidt echo on the flat torus and its semiclassical limits."""

__version__ = "0.1.0"

from .exceptions import ConfigError, ConvergenceError, RegimeError, TorusEchoError, TruncationError
from .lattice import (
    PrimitiveDirection,
    enumerate_primitive,
    h_lambda,
    h_lambda_perp,
    project_I_lambda,
    rational_direction,
)
from .potentials import RegimeSpec, TrigPotential, evaluate, moments, phase_integral
from .states import (
    CoherentSpec,
    FourierState,
    PlaneWaveFamily,
    SuperpositionSpec,
    coherent_state,
    frequency_localization,
    plane_wave,
    superpose,
)
from .propagator import EchoSample, echo, free_evolve, peres_quadratic, perturbed_evolve
from .microlocal import (
    Observable,
    Profile,
    TwoMicrolocalSample,
    convention_gap_bound,
    fidelity_functional,
    op_apply,
    two_microlocal,
)
from .oracles import (
    LimitEntry,
    LimitMeasureSpec,
    classify_limit,
    predict_echo,
    predict_strong,
    predict_theorem,
    predict_two_microlocal,
)
from .harness import ConvergenceReport, Scenario, emit_plots, load_scenario, run_scenario
