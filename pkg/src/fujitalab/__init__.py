"""Numerical laboratory for blow-up vs. global existence in semilinear heat
equations with a gradient nonlinearity, on truncated radial domains."""

from .core import (CriticalExponents, ProblemParams, RegimeVerdict, Verdict,
                   classify_inhomogeneous, classify_mean_nonneg,
                   classify_positive, critical_exponents)
from .grid import (Field, ProfileSpec, RadialGrid, dipole_with_mean,
                   field_to_csv, integrate, l1_norm, mean, sample_profile,
                   sup_norm)
from .operators import (Eigenpair, gradient_magnitude, laplacian,
                        principal_eigenpair, rhs)
from .certificates import (ForcingSpec, GaussianCertificate, OdeVerdict,
                           RateExponents, StationaryCertificate,
                           certificate_to_json, constructed_forcing,
                           gaussian_certificate, gaussian_supersolution,
                           kaplan_functional, kaplan_radius, ode_comparison,
                           rate_exponents, stationary_certificate,
                           stationary_profile, supersolution_residual,
                           testfunction_scaling)
from .solver import (SolveConfig, SolveOutcome, SolveStatus, TraceRecord,
                     TRUNCATION_NOTE, comparison_tolerance, detect_blowup,
                     heat_reference, measure_plateau, run, step, trace_to_csv)

__all__ = [
    "CriticalExponents", "ProblemParams", "RegimeVerdict", "Verdict",
    "classify_inhomogeneous", "classify_mean_nonneg", "classify_positive",
    "critical_exponents",
    "Field", "ProfileSpec", "RadialGrid", "dipole_with_mean", "field_to_csv",
    "integrate", "l1_norm", "mean", "sample_profile", "sup_norm",
    "Eigenpair", "gradient_magnitude", "laplacian", "principal_eigenpair", "rhs",
    "ForcingSpec", "GaussianCertificate", "OdeVerdict", "RateExponents",
    "StationaryCertificate", "certificate_to_json", "constructed_forcing",
    "gaussian_certificate", "gaussian_supersolution", "kaplan_functional",
    "kaplan_radius", "ode_comparison", "rate_exponents",
    "stationary_certificate", "stationary_profile", "supersolution_residual",
    "testfunction_scaling",
    "SolveConfig", "SolveOutcome", "SolveStatus", "TraceRecord",
    "TRUNCATION_NOTE", "comparison_tolerance", "detect_blowup",
    "heat_reference", "measure_plateau", "run", "step", "trace_to_csv",
]

__version__ = "0.1.0"
