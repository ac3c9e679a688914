"""Metrics on low-rank vector bundles over a circle, a line, or a point.

The total space of a rank-k bundle with a metric connection carries the
chart metric

    g = [[ 1 + |A u|^2 , (A u)^T ],
         [   A u       ,   I_k   ]]

in coordinates ``(theta, u_1 .. u_k)``, where ``A(theta)`` is the skew
connection matrix.  Horizontal curves satisfy ``du/dt = -A(theta) u
dtheta/dt``.  Point bases drop the theta coordinate and the total space
is flat ``R^k``.

Two exact identities hold in this family and anchor the verification
suite: the squared-distance function ``f = |u|^2`` has chart gradient
``(0, 2u)`` with ``|grad f|^2 = 4 f``, and ``lap f = 2k``.  Both follow
from ``det g = 1`` and the skewness of A; the finite-difference route
must reproduce them on every configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import config
from .errors import InputError
from .geometry.manifolds import Manifold, as_coords
from .kernels import codes

_BASE_KINDS = {"point": codes.BASE_POINT, "line": codes.BASE_LINE, "circle": codes.BASE_CIRCLE}


def rotation_generator(k: int) -> np.ndarray:
    """Standard skew generator: plane rotation in the first two fiber axes."""
    J = np.zeros((k, k))
    if k >= 2:
        J[0, 1] = -1.0
        J[1, 0] = 1.0
    return J


def _check_skew(name, m, k):
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (k, k):
        raise InputError(f"{name} must be a {k}x{k} matrix")
    if not np.allclose(m, -m.T, atol=1e-12):
        raise InputError(f"{name} must be skew-symmetric for a metric connection")
    return m


@dataclass(frozen=True)
class BundleSpec:
    """Declarative description of a bundle with metric and connection.

    ``connection`` blocks give A(theta) = a0 + a1 cos(2 pi theta / L)
    + b1 sin(2 pi theta / L).  ``transition`` is the orthogonal matrix
    applied to the fiber when the base circle wraps; identity means the
    bundle is trivial.
    """

    rank: int
    base: str = "circle"
    base_length: float = 2.0 * math.pi
    a0: np.ndarray | None = None
    a1: np.ndarray | None = None
    b1: np.ndarray | None = None
    transition: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.rank < 1:
            raise InputError("fiber rank must be at least 1")
        if self.base not in _BASE_KINDS:
            raise InputError(f"unknown base kind {self.base!r}")
        if self.base == "circle" and self.base_length <= 0:
            raise InputError("base circle length must be positive")
        k = self.rank
        for name in ("a0", "a1", "b1"):
            m = getattr(self, name)
            if m is not None:
                object.__setattr__(self, name, _check_skew(name, m, k))
        if self.transition is not None:
            T = np.asarray(self.transition, dtype=np.float64)
            if T.shape != (k, k) or not np.allclose(T.T @ T, np.eye(k), atol=1e-12):
                raise InputError("transition must be an orthogonal matrix")
            object.__setattr__(self, "transition", T)
            for name in ("a0", "a1", "b1"):
                m = getattr(self, name)
                if m is not None and not np.allclose(T @ m, m @ T, atol=1e-10):
                    raise InputError(
                        f"connection block {name} must commute with the transition"
                    )

    @property
    def twisted(self) -> bool:
        return self.transition is not None and not np.allclose(
            self.transition, np.eye(self.rank)
        )


class BundleTotalSpace(Manifold):
    """Total space of a :class:`BundleSpec` as a chart manifold."""

    def __init__(self, spec: BundleSpec, u_window: float = 2.0):
        self.spec = spec
        self.rank = spec.rank
        self.u_window = float(u_window)
        base = _BASE_KINDS[spec.base]
        self.dim = spec.rank + (0 if base == codes.BASE_POINT else 1)
        self.fiber_slice = slice(0, None) if base == codes.BASE_POINT else slice(1, None)
        self.code = codes.pack_bundle(
            spec.rank,
            base,
            spec.base_length if spec.base == "circle" else 0.0,
            spec.a0,
            spec.a1,
            spec.b1,
        )
        self._transition = (
            np.eye(spec.rank) if spec.transition is None else spec.transition
        )

    @property
    def has_base_coordinate(self) -> bool:
        return self.fiber_slice.start == 1

    def connection_at(self, theta):
        """A(theta) matrices, shape (n, k, k)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        k = self.rank
        k2 = k * k
        fl = self.code.floats
        A0 = fl[1 : 1 + k2].reshape(k, k)
        A1 = fl[1 + k2 : 1 + 2 * k2].reshape(k, k)
        B1 = fl[1 + 2 * k2 : 1 + 3 * k2].reshape(k, k)
        if self.spec.base == "circle":
            ang = 2.0 * np.pi * theta / self.spec.base_length
            return (
                A0[None]
                + A1[None] * np.cos(ang)[:, None, None]
                + B1[None] * np.sin(ang)[:, None, None]
            )
        return np.broadcast_to(A0, (len(theta), k, k)).copy()

    def canonicalize(self, P):
        P = np.atleast_2d(as_coords(P)).copy()
        if self.spec.base == "circle":
            L = self.spec.base_length
            m = np.floor(P[:, 0] / L).astype(np.int64)
            P[:, 0] -= m * L
            if self.spec.twisted:
                for mm in np.unique(m):
                    if mm == 0:
                        continue
                    T = np.linalg.matrix_power(self._transition, int(mm))
                    rows = m == mm
                    P[rows, 1:] = P[rows, 1:] @ T.T
        return P

    def image_transforms(self):
        out = [lambda P: np.array(P, dtype=np.float64, copy=True)]
        if self.spec.base != "circle":
            return out
        L = self.spec.base_length
        Tinv = self._transition.T

        def up(P, L=L, M=Tinv):
            Q = np.array(P, dtype=np.float64, copy=True)
            Q[:, 0] += L
            Q[:, 1:] = Q[:, 1:] @ M.T
            return Q

        def down(P, L=L, M=self._transition):
            Q = np.array(P, dtype=np.float64, copy=True)
            Q[:, 0] -= L
            Q[:, 1:] = Q[:, 1:] @ M.T
            return Q

        out.extend([up, down])
        return out

    def chart_window(self):
        w = self.u_window
        uw = [(-w, w)] * self.rank
        if not self.has_base_coordinate:
            return uw
        if self.spec.base == "circle":
            return [(0.0, self.spec.base_length)] + uw
        return [(-w, w)] + uw


def total_space_metric(spec: BundleSpec, u_window: float = 2.0) -> BundleTotalSpace:
    """Build the total space manifold carrying the bundle metric."""
    return BundleTotalSpace(spec, u_window=u_window)


def horizontal_lift(bundle: BundleTotalSpace, theta_fn, u0, t_grid, dtheta_fn=None):
    """Lift a base path horizontally: solve du/dt = -A(theta) u theta'.

    ``theta_fn(t)`` gives the base position; its rate is taken from
    ``dtheta_fn`` or by central differences.  Classical fourth-order
    stepping on the supplied grid.  Returns u sampled on ``t_grid`` with
    shape (len(t_grid), k).
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise InputError("t_grid must be a 1d array with at least two nodes")
    u = np.asarray(u0, dtype=np.float64).copy()
    if u.shape != (bundle.rank,):
        raise InputError("u0 must match the fiber rank")

    if dtheta_fn is None:
        eps = 1e-6

        def dtheta_fn(t):
            return (theta_fn(t + eps) - theta_fn(t - eps)) / (2.0 * eps)

    def rhs(t, u_now):
        A = bundle.connection_at(theta_fn(t))[0]
        return -(A @ u_now) * dtheta_fn(t)

    out = np.empty((len(t_grid), bundle.rank))
    out[0] = u
    for i in range(len(t_grid) - 1):
        t = t_grid[i]
        dt = t_grid[i + 1] - t
        k1 = rhs(t, u)
        k2 = rhs(t + 0.5 * dt, u + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, u + 0.5 * dt * k2)
        k4 = rhs(t + dt, u + dt * k3)
        u = u + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i + 1] = u
    return out


def loop_holonomy(bundle: BundleTotalSpace, n_steps=2048):
    """Holonomy of the base circle: transition composed with the lift map."""
    if bundle.spec.base != "circle":
        raise InputError("holonomy needs a circle base")
    L = bundle.spec.base_length
    t_grid = np.linspace(0.0, L, n_steps + 1)
    k = bundle.rank
    cols = []
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        cols.append(horizontal_lift(bundle, lambda t: t, e, t_grid)[-1])
    lift = np.stack(cols, axis=1)
    return bundle._transition @ lift


def constant_connection_holonomy(bundle: BundleTotalSpace) -> np.ndarray:
    """Closed form for theta-independent A: T exp(-A L)."""
    A = bundle.connection_at(0.0)[0]
    if not np.allclose(bundle.connection_at(1.234567)[0], A, atol=1e-13):
        raise InputError("closed-form holonomy needs a constant connection")
    return bundle._transition @ expm(-A * bundle.spec.base_length)


@dataclass
class SquaredNormField:
    """The fiberwise squared distance ``f(theta, u) = |u|^2``.

    Carries the exact chart formulas alongside the plain evaluator so
    verification can run the analytic and the finite-difference route
    against each other.
    """

    bundle: BundleTotalSpace
    b_coeffs: tuple = field(default=(0.0, 4.0, 0.0))  # b(f) = 4 f

    def __call__(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        u = P[:, self.bundle.fiber_slice]
        return (u * u).sum(axis=1)

    def analytic_gradient(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        out = np.zeros_like(P)
        out[:, self.bundle.fiber_slice] = 2.0 * P[:, self.bundle.fiber_slice]
        return out

    def analytic_gradnorm2(self, P):
        return 4.0 * self(P)

    def analytic_laplacian(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        return np.full(P.shape[0], 2.0 * self.bundle.rank)

    def b_value(self, f):
        c0, c1, c2 = self.b_coeffs
        return c0 + c1 * f + c2 * f * f

    def b_prime(self, f):
        _, c1, c2 = self.b_coeffs
        return c1 + 2.0 * c2 * f


def squared_norm_function(bundle: BundleTotalSpace) -> SquaredNormField:
    return SquaredNormField(bundle)


def sphere_bundle_mean_curvature(
    bundle: BundleTotalSpace,
    radius,
    n_samples=64,
    h=config.DEFAULT_TOL.fd_step,
):
    """Mean curvature of the radius-r sphere bundle w.r.t. the outward normal.

    Measured through the divergence identity at sampled points of the
    level; returns (mean, spread) over the samples.  The expected value
    is -(k-1)/r, independent of the connection.
    """
    from .geometry.operators import mean_curvature_level

    r = float(radius)
    if r <= 0:
        raise InputError("sphere bundle radius must be positive")
    f = squared_norm_function(bundle)
    pts = []
    rng_dirs = _fibonacci_directions(bundle.rank, n_samples)
    if bundle.has_base_coordinate:
        if bundle.spec.base == "circle":
            thetas = np.linspace(0.0, bundle.spec.base_length, n_samples, endpoint=False)
        else:
            thetas = np.linspace(-1.0, 1.0, n_samples)
        for th, v in zip(thetas, rng_dirs):
            pts.append(np.concatenate([[th], r * v]))
    else:
        for v in rng_dirs:
            pts.append(r * v)
    P = np.asarray(pts)
    fv = r * r
    H = mean_curvature_level(
        bundle, f, P, b_value=f.b_value(fv), b_prime=f.b_prime(fv), h=h
    )
    H = np.atleast_1d(H)
    return float(H.mean()), float(H.max() - H.min())


def _fibonacci_directions(k, n):
    """Deterministic well-spread unit vectors in R^k."""
    if k == 1:
        return np.array([[1.0] if i % 2 == 0 else [-1.0] for i in range(n)])
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    pts = np.empty((n, k))
    if k == 2:
        ang = 2.0 * np.pi * np.arange(n) / golden
        pts[:, 0] = np.cos(ang)
        pts[:, 1] = np.sin(ang)
        return pts
    # k == 3: spiral on the sphere; higher ranks fall back to a lattice
    if k == 3:
        i = np.arange(n) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / n)
        theta = 2.0 * np.pi * i / golden
        pts[:, 0] = np.sin(phi) * np.cos(theta)
        pts[:, 1] = np.sin(phi) * np.sin(theta)
        pts[:, 2] = np.cos(phi)
        return pts
    alpha = np.array([math.sqrt(p) for p in (2, 3, 5, 7, 11, 13)[:k]])
    raw = np.outer(np.arange(1, n + 1), alpha) % 1.0
    pts = np.sin(2.0 * np.pi * (raw - 0.5))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts
