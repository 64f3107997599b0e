"""Differential approximants: exact fitting, singularities, ensembles, extension."""
from .archive import read_archive, write_archive
from .ensemble import (EnsembleResult, Satellite, consensus, default_family, ensemble_scan,
                       fit_members, satellites)
from .extend import ExtensionResult, extend_series
from .fit import (ApproximantSpec, HolonomicApproximant, exact_coefficients,
                  fit_approximant)
from .roots import SingularityEstimate, aberth_roots, find_singularities
from .testseries import make_test_series

__all__ = [
    "ApproximantSpec", "EnsembleResult", "ExtensionResult", "HolonomicApproximant",
    "Satellite", "SingularityEstimate", "aberth_roots", "consensus", "default_family",
    "ensemble_scan", "exact_coefficients", "extend_series", "find_singularities",
    "fit_approximant", "fit_members", "make_test_series", "read_archive", "satellites",
    "write_archive",
]
