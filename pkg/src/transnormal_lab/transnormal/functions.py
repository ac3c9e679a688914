"""Transnormal functions attached to a classified system.

Every transnormal function here satisfies |grad f|^2 = b(f) with b a
quadratic polynomial in f, one of four normal forms:

    A   f = d^2            b(f) = 4 f
    B   f = cos(pi d / T)  b(f) = (pi/T)^2 (1 - f^2)
    C   f = signed d       b(f) = 1
    D   f = sin(pi d / T)  b(f) = (pi/T)^2 (1 - f^2)

where d is the leaf-space distance from the appropriate special foil (A:
a focal or mirror foil, B: a focal foil, C/D: a regular foil).  The case
is forced by the system type.  When the metric makes the function
isoparametric as well, the Laplacian a(f) is linear in f and recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bundles import BundleTotalSpace, squared_norm_function
from ..errors import InputError, UnsupportedDescriptor
from ..geometry.manifolds import EndCondition, FlatQuotient, WarpedProfile

CASE_BY_TYPE = {
    "Cylindrical": "C",
    "Planar": "A",
    "TwistedCylindrical": "A",
    "Toric": "D",
    "Spherical": "B",
    "RealProjective": "B",
    "KleinBottled": "D",
}


@dataclass(frozen=True)
class BProfile:
    """b(f) = c0 + c1 f + c2 f^2, with the admissible f window."""

    c0: float
    c1: float
    c2: float
    f_lo: float
    f_hi: float

    def __call__(self, f):
        f = np.asarray(f, dtype=np.float64)
        return self.c0 + f * (self.c1 + f * self.c2)

    def derivative(self, f):
        f = np.asarray(f, dtype=np.float64)
        return self.c1 + 2.0 * self.c2 * f

    @property
    def coefficients(self):
        return (self.c0, self.c1, self.c2)


@dataclass(frozen=True)
class TransnormalFunction:
    """Callable f on canonical coordinates plus its certified profiles."""

    case: str
    b: BProfile
    a_coeffs: tuple | None  # (a0, a1) when Laplacian = a0 + a1 f, else None
    _eval: object
    label: str = ""

    def __call__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        squeeze = pts.ndim == 1
        if squeeze:
            pts = pts[None, :]
        out = self._eval(pts)
        return float(out[0]) if squeeze else out

    @property
    def is_isoparametric(self) -> bool:
        return self.a_coeffs is not None

    def a(self, f):
        if self.a_coeffs is None:
            raise InputError("function is transnormal but not isoparametric")
        a0, a1 = self.a_coeffs
        return a0 + a1 * np.asarray(f, dtype=np.float64)

    def window(self):
        return (self.b.f_lo, self.b.f_hi)


def _trig_profile(T):
    w = math.pi / T
    return w, BProfile(w * w, 0.0, -w * w, -1.0, 1.0)


def _flat_function(m: FlatQuotient, sys_type: str, seed_y: float):
    if sys_type == "Planar":
        def ev(pts):
            return pts[:, 0] ** 2 + pts[:, 1] ** 2
        return TransnormalFunction(
            "A", BProfile(0.0, 4.0, 0.0, 0.0, math.inf), (4.0, 0.0), ev, "plane d^2"
        )
    if sys_type == "Cylindrical":
        def ev(pts):
            return pts[:, 1].copy()
        return TransnormalFunction(
            "C", BProfile(1.0, 0.0, 0.0, -math.inf, math.inf), (0.0, 0.0), ev,
            "cylinder height",
        )
    if sys_type == "TwistedCylindrical":
        def ev(pts):
            return pts[:, 1] ** 2
        return TransnormalFunction(
            "A", BProfile(0.0, 4.0, 0.0, 0.0, math.inf), (2.0, 0.0), ev,
            "squared distance to the core",
        )
    per = m.y_period
    if sys_type == "Toric":
        w, b = _trig_profile(per / 2.0)
        k = 2.0 * math.pi / per
        y0 = seed_y

        def ev(pts):
            return np.sin(k * (pts[:, 1] - y0))

        return TransnormalFunction("D", b, (0.0, -w * w), ev, "torus wave")
    if sys_type == "KleinBottled":
        # mirrors sit at y = 0 and y = per/2; midline at per/4
        w, b = _trig_profile(per / 2.0)
        k = 2.0 * math.pi / per

        def ev(pts):
            return -np.cos(k * pts[:, 1])

        return TransnormalFunction("D", b, (0.0, -w * w), ev, "glide-even wave")
    raise UnsupportedDescriptor(f"no flat function for type {sys_type}")


def _warped_function(m: WarpedProfile, sys_type: str, seed_r: float, rho):
    span = m.r_hi - m.r_lo
    if sys_type in ("Spherical", "RealProjective"):
        w, b = _trig_profile(span)

        def ev(pts):
            return np.cos(w * (pts[:, 0] - m.r_lo))

        # round profiles keep the Laplacian linear in f: the full sphere
        # carries an eigenfunction, the half profile a shifted one
        a = None
        if rho is not None:
            if sys_type == "Spherical":
                a = (0.0, -2.0 / rho**2)
            else:
                a = (-2.0 / rho**2, -6.0 / rho**2)
        return TransnormalFunction("B", b, a, ev, "polar cosine")
    if sys_type == "Toric":
        w, b = _trig_profile(span / 2.0)
        k = 2.0 * math.pi / span
        r0 = seed_r

        def ev(pts):
            return np.sin(k * (pts[:, 0] - r0))

        return TransnormalFunction("D", b, None, ev, "wrapped wave")
    if sys_type == "Cylindrical":
        def ev(pts):
            return pts[:, 0].copy()
        return TransnormalFunction(
            "C", BProfile(1.0, 0.0, 0.0, float(m.r_lo), float(m.r_hi)), None, ev,
            "radial height",
        )
    if sys_type in ("Planar", "TwistedCylindrical"):
        anchor = m.r_lo if m.left in (EndCondition.COLLAPSE, EndCondition.MIRROR) else m.r_hi

        def ev(pts):
            return (pts[:, 0] - anchor) ** 2

        return TransnormalFunction(
            "A", BProfile(0.0, 4.0, 0.0, 0.0, span * span), None, ev,
            "squared distance to the end",
        )
    if sys_type == "KleinBottled":
        w, b = _trig_profile(span)
        k = math.pi / span

        def ev(pts):
            return -np.cos(k * (pts[:, 0] - m.r_lo))

        return TransnormalFunction("D", b, None, ev, "double-mirror wave")
    raise UnsupportedDescriptor(f"no warped function for type {sys_type}")


def build_transnormal_function(manifold, descriptor=None, seed=None) -> TransnormalFunction:
    """Build the normal-form transnormal function for a system.

    ``descriptor`` is the classification result; when omitted the system
    is classified first.  The returned callable acts on canonical chart
    coordinates.
    """
    if isinstance(manifold, BundleTotalSpace):
        field = squared_norm_function(manifold)
        return TransnormalFunction(
            "A",
            BProfile(0.0, 4.0, 0.0, 0.0, math.inf),
            (2.0 * manifold.rank, 0.0),
            lambda pts: field(pts),
            "fiber squared norm",
        )
    if descriptor is None:
        from .classify import classify

        descriptor = classify(manifold, seed=seed)
    sys_type = descriptor.type_tag
    if sys_type not in CASE_BY_TYPE:
        raise UnsupportedDescriptor(f"no normal form for type {sys_type!r}")
    if isinstance(manifold, FlatQuotient):
        seed_y = 0.0
        if descriptor.seed.get("locus", ("",))[0] == "horizontal":
            seed_y = float(descriptor.seed["locus"][1])
        return _flat_function(manifold, sys_type, seed_y)
    if isinstance(manifold, WarpedProfile):
        seed_r = float(manifold.r_lo)
        loc = descriptor.seed.get("locus", ("",))
        if loc[0] == "level":
            seed_r = float(loc[1])
        return _warped_function(manifold, sys_type, seed_r, manifold.round_radius())
    raise UnsupportedDescriptor(
        f"cannot build a transnormal function on {type(manifold).__name__}"
    )
