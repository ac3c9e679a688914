"""Chart-level descriptions of the supported ambient surfaces.

Three families cover everything the package constructs:

* :class:`FlatQuotient` : quotients of the Euclidean plane by a discrete
  group generated by translations and glide reflections (plane, cylinder,
  torus, Moebius band, Klein bottle).
* :class:`WarpedProfile` : metrics ``dr^2 + w(r, theta)^2 dtheta^2`` over a
  profile interval with declared end behaviour (round sphere, projective
  plane, surgered double-disk spaces, perturbed tori).
* bundle total spaces are provided by :mod:`transnormal_lab.bundles` and
  satisfy the same interface.

Every manifold carries a kernel code (see ``kernels.codes``) so metric and
geodesic computations run identically on either compute backend.  Chart
coordinates are unconstrained floats; ``canonicalize`` folds them into the
fundamental domain and ``image_transforms`` enumerates nearby deck images
for quotient-aware distance computations.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import DomainError, InputError
from ..kernels import codes


class EndCondition(Enum):
    """Behaviour of a warped profile at an interval end."""

    OPEN = "open"
    COLLAPSE = "collapse"
    MIRROR = "mirror"
    WRAP = "wrap"


_END_CODE = {
    EndCondition.OPEN: codes.END_OPEN,
    EndCondition.COLLAPSE: codes.END_COLLAPSE,
    EndCondition.MIRROR: codes.END_MIRROR,
    EndCondition.WRAP: codes.END_WRAP,
}


@dataclass(frozen=True)
class PointOnManifold:
    """Coordinates of a point in the active chart."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "coords", np.asarray(self.coords, dtype=np.float64)
        )


def as_coords(p) -> np.ndarray:
    if isinstance(p, PointOnManifold):
        return p.coords
    return np.asarray(p, dtype=np.float64)


@dataclass
class GeodesicPath:
    """Sampled solution of the geodesic equation.

    ``events`` lists ``(t, kind)`` pairs for every profile fold the path
    crossed; ``kind`` is one of ``"collapse"``, ``"mirror"``, ``"wrap"``.
    """

    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    energies: np.ndarray
    events: list = field(default_factory=list)

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def energy_drift(self) -> float:
        e0 = self.energies[0]
        if e0 == 0.0:
            return float(np.max(np.abs(self.energies)))
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))


class Manifold(ABC):
    """Common chart interface consumed by operators and classifiers."""

    dim: int
    code: codes.MetricCode

    @abstractmethod
    def canonicalize(self, P):
        """Fold chart coordinates into the fundamental domain."""

    @abstractmethod
    def image_transforms(self):
        """Deck images as callables acting on (n, dim) arrays.

        The identity is always included.  Enough images are returned that
        any two canonical points at quotient distance below the domain
        size find their minimizing representative.
        """

    @abstractmethod
    def chart_window(self):
        """Default sampling box, a list of (lo, hi) per coordinate."""

    def metric_scale(self) -> np.ndarray:
        """Per-coordinate length scale used for chart-space distances.

        For charts whose metric is (close to) ``diag(1, s^2, ...)`` the
        scaled Euclidean distance is a faithful stand-in for the true
        distance at small separations.
        """
        return np.ones(self.dim)


class FlatQuotient(Manifold):
    """Flat plane quotients by translations and a glide reflection.

    Parameters
    ----------
    x_period : float or None
        Translation length along x; ``None`` for the full plane.
    y_period : float or None
        Translation length along y.
    glide : bool
        When set, the x generator is a glide reflection: translation by
        ``x_period`` composed with ``y -> -y``.
    """

    dim = 2

    def __init__(self, x_period=None, y_period=None, glide=False, window=3.0,
                 label=""):
        if glide and x_period is None:
            raise InputError("a glide reflection needs an x translation length")
        self.x_period = None if x_period is None else float(x_period)
        self.y_period = None if y_period is None else float(y_period)
        self.glide = bool(glide)
        self._window = float(window)
        self.label = label
        self.code = codes.pack_flat(2)

    @classmethod
    def plane(cls, window=3.0):
        return cls(window=window, label="plane")

    @classmethod
    def cylinder(cls, circumference=2.0 * math.pi, window=3.0):
        return cls(x_period=circumference, window=window, label="cylinder")

    @classmethod
    def torus(cls, x_period=2.0 * math.pi, y_period=2.6):
        return cls(x_period=x_period, y_period=y_period, label="torus")

    @classmethod
    def moebius(cls, glide_length=math.pi, window=3.0):
        return cls(x_period=glide_length, glide=True, window=window,
                   label="moebius")

    @classmethod
    def klein(cls, glide_length=math.pi, y_period=2.6):
        return cls(x_period=glide_length, y_period=y_period, glide=True,
                   label="klein")

    def canonicalize(self, P):
        P = np.atleast_2d(as_coords(P)).copy()
        x = P[:, 0]
        y = P[:, 1]
        if self.x_period is not None:
            m = np.floor(x / self.x_period)
            x -= m * self.x_period
            if self.glide:
                y *= np.where(m.astype(np.int64) % 2 == 0, 1.0, -1.0)
        if self.y_period is not None:
            y %= self.y_period
        P[:, 0] = x
        P[:, 1] = y
        return P

    def image_transforms(self):
        xs = [0.0] if self.x_period is None else [-self.x_period, 0.0, self.x_period]
        ys = [0.0] if self.y_period is None else [-self.y_period, 0.0, self.y_period]
        out = []
        for i, dx in enumerate(xs):
            flip = self.glide and dx != 0.0
            for dy in ys:
                sign = -1.0 if flip else 1.0
                out.append(self._affine(dx, dy, sign))
        return out

    @staticmethod
    def _affine(dx, dy, sy):
        def apply(P):
            Q = np.array(P, dtype=np.float64, copy=True)
            Q[:, 0] += dx
            Q[:, 1] = sy * Q[:, 1] + dy
            return Q

        return apply

    def chart_window(self):
        w = self._window
        xw = (0.0, self.x_period) if self.x_period is not None else (-w, w)
        yw = (0.0, self.y_period) if self.y_period is not None else (-w, w)
        return [xw, yw]


def _padded_spline_block(r_grid, values, left, right, period=None):
    """Fit a cubic through samples extended past the ends, so kernel
    evaluation stays smooth under finite-difference stencils and fold
    overshoot.  Collapse ends continue oddly, mirror ends evenly, wrapped
    ends periodically."""
    r_grid = np.asarray(r_grid, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if r_grid.ndim != 1 or r_grid.shape != values.shape:
        raise InputError("profile grid and values must be equal-length 1d arrays")
    dr = np.diff(r_grid)
    if not np.allclose(dr, dr[0], rtol=1e-9, atol=1e-12):
        raise InputError("profile grid must be uniform")
    dr = dr[0]
    n_pad = 8
    lo, hi = r_grid[0], r_grid[-1]
    left_x = lo - dr * np.arange(n_pad, 0, -1)
    right_x = hi + dr * np.arange(1, n_pad + 1)

    def extend(side, end):
        if end == EndCondition.WRAP or period is not None:
            per = period if period is not None else hi - lo
            xs = left_x if side == "left" else right_x
            return np.interp((xs - lo) % per + lo, r_grid, values)
        if end == EndCondition.COLLAPSE:
            # odd reflection keeps |r|-like profiles smooth through the pole
            if side == "left":
                return 2.0 * values[0] - values[1 : n_pad + 1][::-1]
            return 2.0 * values[-1] - values[-n_pad - 1 : -1][::-1]
        if end == EndCondition.MIRROR:
            if side == "left":
                return values[1 : n_pad + 1][::-1]
            return values[-n_pad - 1 : -1][::-1]
        # open: linear continuation of the edge slope
        if side == "left":
            slope = (values[1] - values[0]) / dr
            return values[0] + slope * (left_x - lo)
        slope = (values[-1] - values[-2]) / dr
        return values[-1] + slope * (right_x - hi)

    ext_x = np.concatenate([left_x, r_grid, right_x])
    ext_v = np.concatenate([extend("left", left), values, extend("right", right)])
    cs = CubicSpline(ext_x, ext_v)
    return codes.spline_block(ext_x[0], dr, cs.c), len(ext_x)


class WarpedProfile(Manifold):
    """Surface ``dr^2 + w(r, theta)^2 dtheta^2`` over a profile interval.

    The radial warp factor is a closed form (constant, linear, sine) or a
    sampled profile fitted with a cubic; an optional angular factor
    multiplies it.  End conditions determine how normal geodesics fold:
    collapse ends continue antipodally (theta advances by half the fiber),
    mirror ends reflect with the declared involution shift, wrapped ends
    identify the interval into a circle.
    """

    dim = 2

    def __init__(
        self,
        r_lo,
        r_hi,
        fiber_len,
        left,
        right,
        rkind=codes.WARP_CONST,
        rparams=(1.0, 0.0, 0.0, 0.0),
        r_samples=None,
        s_samples=None,
        sigma_left=None,
        sigma_right=None,
        label="",
    ):
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        self.fiber_len = float(fiber_len)
        self.left = left
        self.right = right
        self.label = label
        if (left == EndCondition.WRAP) != (right == EndCondition.WRAP):
            raise InputError("wrapped profiles must wrap at both ends")
        half = self.fiber_len / 2.0
        self.sigma_left = half if left == EndCondition.COLLAPSE else (
            0.0 if sigma_left is None else float(sigma_left)
        )
        self.sigma_right = half if right == EndCondition.COLLAPSE else (
            0.0 if sigma_right is None else float(sigma_right)
        )

        r_block = None
        n_rknots = 0
        if r_samples is not None:
            grid, vals = r_samples
            period = self.r_hi - self.r_lo if left == EndCondition.WRAP else None
            r_block, n_rknots = _padded_spline_block(grid, vals, left, right, period)
            rkind = codes.WARP_SPLINE
        s_block = None
        skind = codes.WARP_CONST
        sparams = (1.0, 0.0, 0.0, 0.0)
        if s_samples is not None:
            grid, vals = s_samples
            s_block, n_sknots = _padded_spline_block(
                grid, vals, EndCondition.WRAP, EndCondition.WRAP, period=self.fiber_len
            )
            skind = codes.WARP_SPLINE

        self.rkind = rkind
        self.code = codes.pack_warped(
            self.r_lo,
            self.r_hi,
            self.fiber_len,
            _END_CODE[left],
            _END_CODE[right],
            rkind,
            rparams,
            skind,
            sparams,
            self.sigma_left,
            self.sigma_right,
            r_spline=r_block,
            s_spline=s_block,
        )

    @classmethod
    def sphere(cls, radius=1.0):
        r = float(radius)
        return cls(
            0.0,
            math.pi * r,
            2.0 * math.pi,
            EndCondition.COLLAPSE,
            EndCondition.COLLAPSE,
            rkind=codes.WARP_SIN,
            rparams=(r, 1.0 / r, 0.0, 0.0),
            label="sphere",
        )

    @classmethod
    def projective_plane(cls, radius=1.0):
        r = float(radius)
        return cls(
            0.0,
            math.pi * r / 2.0,
            2.0 * math.pi,
            EndCondition.COLLAPSE,
            EndCondition.MIRROR,
            rkind=codes.WARP_SIN,
            rparams=(r, 1.0 / r, 0.0, 0.0),
            sigma_right=math.pi,
            label="projective-plane",
        )

    @classmethod
    def from_profile(cls, r_grid, warp_values, fiber_len, left, right, **kw):
        return cls(
            float(r_grid[0]),
            float(r_grid[-1]),
            fiber_len,
            left,
            right,
            r_samples=(r_grid, warp_values),
            **kw,
        )

    def warp(self, P):
        """Total warp factor w(r, theta) at chart points."""
        from .. import backend

        P = np.atleast_2d(as_coords(P))
        g = backend.get_kernels().metric_batch(self.code.ints, self.code.floats, P)
        return np.sqrt(g[:, 1, 1])

    def canonicalize(self, P):
        P = np.atleast_2d(as_coords(P)).copy()
        r = P[:, 0]
        th = P[:, 1]
        if self.left == EndCondition.WRAP:
            per = self.r_hi - self.r_lo
            r[:] = self.r_lo + (r - self.r_lo) % per
        else:
            fold_left = self.left in (EndCondition.COLLAPSE, EndCondition.MIRROR)
            fold_right = self.right in (EndCondition.COLLAPSE, EndCondition.MIRROR)
            for _ in range(64):
                below = (r < self.r_lo) & fold_left
                above = (r > self.r_hi) & fold_right
                if not (below.any() or above.any()):
                    break
                r[below] = 2.0 * self.r_lo - r[below]
                th[below] += self.sigma_left
                r[above] = 2.0 * self.r_hi - r[above]
                th[above] += self.sigma_right
        th %= self.fiber_len
        P[:, 0] = r
        P[:, 1] = th
        return P

    def image_transforms(self):
        L = self.fiber_len
        out = []
        for k in (-1.0, 0.0, 1.0):
            out.append(self._shift(0.0, k * L))
        if self.left == EndCondition.WRAP:
            per = self.r_hi - self.r_lo
            for k in (-1.0, 0.0, 1.0):
                out.append(self._shift(-per, k * L))
                out.append(self._shift(per, k * L))
        return out

    @staticmethod
    def _shift(dr, dth):
        def apply(P):
            Q = np.array(P, dtype=np.float64, copy=True)
            Q[:, 0] += dr
            Q[:, 1] += dth
            return Q

        return apply

    def chart_window(self, margin=0.02):
        if self.left == EndCondition.WRAP:
            rw = (self.r_lo, self.r_hi)
        else:
            pad = margin * (self.r_hi - self.r_lo)
            lo = self.r_lo + (pad if self.left != EndCondition.OPEN else -2.0)
            hi = self.r_hi - (pad if self.right != EndCondition.OPEN else -2.0)
            rw = (lo, hi)
        return [rw, (0.0, self.fiber_len)]

    def round_radius(self):
        """Radius rho when the warp equals rho*sin((r - r_lo)/rho) over
        the whole interval (round sphere or half-sphere profile), else
        None."""
        if not (np.isfinite(self.r_lo) and np.isfinite(self.r_hi)):
            return None
        span = self.r_hi - self.r_lo
        rs = np.linspace(self.r_lo, self.r_hi, 33)
        w = self.warp(np.column_stack([rs, np.zeros_like(rs)]))
        for rho in (span / math.pi, 2.0 * span / math.pi):
            if np.max(np.abs(w - rho * np.sin((rs - self.r_lo) / rho))) < 1e-9:
                return float(rho)
        return None

    def metric_scale(self):
        # representative fiber scale at mid profile, good enough for
        # chart-space matching tolerances
        r_mid = 0.5 * (self.r_lo + self.r_hi)
        if not np.isfinite(r_mid):
            r_mid = 0.0
        w = float(self.warp([[r_mid, 0.0]])[0])
        return np.array([1.0, max(w, 1e-12)])

    def fold_radial(self, r0, signed_t):
        """Exact fold of ``r0 + signed_t`` through the interval ends.

        Returns ``(r, theta_shift, events)`` where events is a list of
        ``(t_cross, end_condition)`` in increasing crossing time.
        """
        if self.left == EndCondition.WRAP:
            per = self.r_hi - self.r_lo
            r = self.r_lo + (r0 - self.r_lo + signed_t) % per
            return r, 0.0, []
        pos = float(r0)
        direction = 1.0 if signed_t >= 0 else -1.0
        remaining = abs(float(signed_t))
        elapsed = 0.0
        shift = 0.0
        events = []
        for _ in range(10000):
            if direction > 0:
                gap = self.r_hi - pos if np.isfinite(self.r_hi) else np.inf
                end, sig = self.right, self.sigma_right
                target = self.r_hi
            else:
                gap = pos - self.r_lo if np.isfinite(self.r_lo) else np.inf
                end, sig = self.left, self.sigma_left
                target = self.r_lo
            if remaining <= gap or not np.isfinite(gap) or end == EndCondition.OPEN:
                # open ends do not fold; the chart simply continues
                pos += direction * remaining
                return pos, shift, events
            remaining -= gap
            elapsed += gap
            pos = target
            events.append((elapsed, end))
            shift += sig
            direction *= -1.0
        raise DomainError("radial fold did not terminate; degenerate interval?")
