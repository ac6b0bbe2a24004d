"""Spectral-domain propagation of a weak probe through a Lambda medium
dressed by a periodically chirped control field."""

from .errors import ChirpEITError, NumericalError, ValidationError
from .model import (
    AU,
    AtomicUnits,
    ControlFieldSpec,
    FloquetSpectrum,
    FrequencyGrid,
    GeneralPeriodic,
    MediumParams,
    MixingAngle,
    ProbePulseSpec,
    SinusoidalChirp,
    chirp_coefficients,
    derive_kappa2,
    incoming_spectrum,
    mixing_angle,
)
from .floquet import (
    FloquetEngine,
    build_coupling_matrix,
    build_propagation_matrix,
    convergence_report,
    propagate,
    reconstruct_time,
    solve_coherence,
    susceptibility,
)
from .adiabatic import (
    adiabatic_solution,
    adiabatic_spectrum,
    ladder_propagate,
    nprime_eigensystem,
    oscillation_period,
    overlap,
    overlap_quadrature,
    project_onto_optimal,
)
from .specfun import bessel_j, bessel_row

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
