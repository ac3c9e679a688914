"""Transnormal systems laboratory.

Construction, classification and numerical verification of transnormal
and isoparametric structures on flat quotient surfaces, warped profile
surfaces and low-rank disk bundles, including double-disk-bundle metric
surgery with constant-mean-curvature leaves.
"""

__version__ = "0.1.0"

from . import backend, config  # noqa: F401
