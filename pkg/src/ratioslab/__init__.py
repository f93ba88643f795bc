"""Low-lying zeros of quadratic twists of the Ramanujan tau L-function, numerically."""

from .modular_arith import TauTable, hecke_star, satake_angle, tau_series, tau_star
from .nt_density import DensityBreakdown, nt_one_level_density
from .quadratic_characters import DiscriminantSet, enumerate_discriminants, kronecker_chi
from .ratios_side import ComparisonReport, b_delta, compare, rc_one_level_density, remainder_R
from .rmt_sim import EnsembleSpec, ks_statistic, sample_lowest
from .special_fn import TruncationPolicy, fejer_pair, l_sym2, zeta

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport",
    "DensityBreakdown",
    "DiscriminantSet",
    "EnsembleSpec",
    "TauTable",
    "TruncationPolicy",
    "b_delta",
    "compare",
    "enumerate_discriminants",
    "fejer_pair",
    "hecke_star",
    "kronecker_chi",
    "ks_statistic",
    "l_sym2",
    "nt_one_level_density",
    "rc_one_level_density",
    "remainder_R",
    "sample_lowest",
    "satake_angle",
    "tau_series",
    "tau_star",
    "zeta",
]
