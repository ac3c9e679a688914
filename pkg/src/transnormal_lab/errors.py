"""Exception taxonomy shared across the package.

Every error raised on a user-reachable path derives from
:class:`TransnormalLabError`, so callers (and the CLI) can catch one base
class and map subtypes to exit codes.
"""

from __future__ import annotations


class TransnormalLabError(Exception):
    """Base class for all package errors."""


class DomainError(TransnormalLabError):
    """A coordinate lies outside the chart domain of the manifold."""


class SingularMetricError(TransnormalLabError):
    """The metric matrix is singular or indefinite at the requested point."""


class CollapseReached(TransnormalLabError):
    """A normal geodesic hit a collapsing end of the profile interval.

    Parameters
    ----------
    t_star : float
        Arc length parameter at which the focal point was reached.
    """

    def __init__(self, t_star: float, message: str | None = None):
        self.t_star = float(t_star)
        super().__init__(message or f"focal point reached at t = {self.t_star:.6g}")


class StepTooLarge(TransnormalLabError):
    """Integration step failed the energy-drift guard.

    Carries a suggested replacement step size.
    """

    def __init__(self, drift: float, suggested_step: float):
        self.drift = float(drift)
        self.suggested_step = float(suggested_step)
        super().__init__(
            f"energy drift {drift:.3e} exceeds guard; retry with step "
            f"<= {suggested_step:.3e}"
        )


class SingularLevelError(TransnormalLabError):
    """An operator was requested on a level where |grad f| is below the
    regularity threshold (focal variety)."""


class AmbiguousMatch(TransnormalLabError):
    """Two identification patterns explain the same cloud coincidence.

    Both candidates are reported; nothing is guessed.
    """

    def __init__(self, candidates):
        self.candidates = list(candidates)
        super().__init__(
            "cloud coincidence admits several identification patterns: "
            + ", ".join(str(c) for c in self.candidates)
        )


class HorizonExceeded(TransnormalLabError):
    """The foil march passed t_max without resolving the system.

    The partial descriptor collected so far is attached so callers can
    still emit a truncated report.
    """

    def __init__(self, t_max: float, partial=None):
        self.t_max = float(t_max)
        self.partial = partial
        super().__init__(f"no identification or special foil within t <= {t_max:.6g}")


class UnsupportedDescriptor(TransnormalLabError):
    """The descriptor is valid but outside the implemented construction set."""


class InputError(TransnormalLabError):
    """Malformed or inconsistent user input (specs, masses, tolerances)."""


class InsufficientSamples(TransnormalLabError):
    """Too few regular samples survived filtering to fill the requested bins."""
