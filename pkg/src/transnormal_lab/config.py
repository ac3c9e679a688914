"""Runtime configuration: tolerances, step sizes, environment switches."""

from __future__ import annotations

import os
from dataclasses import dataclass

ENV_BACKEND = "TRANSNORMAL_LAB_NUMBA"
ENV_THREADS = "TRANSNORMAL_LAB_THREADS"


@dataclass(frozen=True)
class Tolerances:
    """Default numerical tolerances used across operators and reports.

    pointwise   : pointwise identity checks (finite-difference routes)
    energy      : relative energy drift allowed along a geodesic
    regularity  : |grad f| threshold below which a level is treated as focal
    fd_step     : step for finite-difference gradients and Laplacians
    match_rel   : cloud matching tolerance, relative to the foil extent
    """

    pointwise: float = 1e-6
    energy: float = 1e-8
    regularity: float = 1e-6
    fd_step: float = 1e-4
    match_rel: float = 1e-4


DEFAULT_TOL = Tolerances()

# Geodesic integrator defaults.  The Christoffel stencil uses a wider step
# than scalar operators because fourth order differences of the metric are
# taken twice per entry.
GEODESIC_STEP = 2e-3
CHRISTOFFEL_STEP = 1e-3

# Sampling defaults for verification reports.
DEFAULT_SAMPLES = 4096
DEFAULT_BINS = 64


def thread_cap() -> int | None:
    """Worker cap from the environment, or None when unset."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    return max(1, n)


def apply_thread_cap() -> None:
    """Clamp numba's thread pool to the configured cap, when both exist."""
    cap = thread_cap()
    if cap is None:
        return
    try:
        import numba
    except ImportError:
        return
    try:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
    except ValueError:
        pass
