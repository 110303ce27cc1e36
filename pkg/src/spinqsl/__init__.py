"""Spin-S dynamics in Jacobi-elliptic fields, speed limits and spin uncertainty."""
from .dynamics import (AlphaPropagator, FieldParams, Trajectory, Validity, analytic_resonance_spin,
                       build_alpha_propagator, propagate_numeric)
from .elliptic import (EllipticModulus, complete_E, complete_K, incomplete_E, jacobi_sncndn)
from .errors import (BoundViolation, ConfigError, DegenerateVector, DimensionMismatch,
                     DivergentInput, InsufficientCoverage, InvalidGrid, InvalidSpin, NotApplicable,
                     NotClosed, NotPureState, SpinQslError)
from .geometry import Curve3D, FrenetData, circulation, closure_period, frenet_analyze
from .qsl import QslReport, hodograph_length, mt_check, pole_distance, tau1_qsl, tau_qsl
from .scenario import ResultManifest, ScenarioConfig, run_scenario
from .spin_algebra import SpinSystem, coherence_vector, make_spin_system
from .uncertainty import CovarianceReport, UncertaintyReport, conditional_measures, covariance

__version__ = "0.1.0"

__all__ = [
    "AlphaPropagator",
    "BoundViolation",
    "ConfigError",
    "CovarianceReport",
    "Curve3D",
    "DegenerateVector",
    "DimensionMismatch",
    "DivergentInput",
    "EllipticModulus",
    "FieldParams",
    "FrenetData",
    "InsufficientCoverage",
    "InvalidGrid",
    "InvalidSpin",
    "NotApplicable",
    "NotClosed",
    "NotPureState",
    "QslReport",
    "ResultManifest",
    "ScenarioConfig",
    "SpinQslError",
    "SpinSystem",
    "Trajectory",
    "UncertaintyReport",
    "Validity",
    "analytic_resonance_spin",
    "build_alpha_propagator",
    "circulation",
    "closure_period",
    "coherence_vector",
    "complete_E",
    "complete_K",
    "conditional_measures",
    "covariance",
    "frenet_analyze",
    "hodograph_length",
    "incomplete_E",
    "jacobi_sncndn",
    "make_spin_system",
    "mt_check",
    "pole_distance",
    "propagate_numeric",
    "run_scenario",
    "tau1_qsl",
    "tau_qsl",
]
