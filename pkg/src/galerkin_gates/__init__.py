"""Galerkin simulation and truncation-error certificates for bilinear quantum gates."""

from .algebra import expm_skew, op_norm
from .bounds import (
    ErrorCertificate,
    minimal_oscillator_dimension,
    oscillator_tail_coefficient,
    oscillator_truncation_bound,
    total_error_bound,
    well_tail_bound,
    well_tail_exact,
)
from .controls import (
    PiecewiseConstantControl,
    SinusoidSpec,
    concat,
    discretize_sinusoid,
    pulse_train,
    synthesize_resonant_transfer,
)
from .models import ModelKind, Perturbation, QuantumModel, check_chain, coupling, eigenvalue
from .propagate import GalerkinSystem, Trajectory, compress, gate_fidelities, propagate

__version__ = "0.1.0"
