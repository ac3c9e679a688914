"""Differential-geometric operators built on the kernel layer.

All derivatives of the metric are taken by finite differences of
``metric_at``; no family-specific Christoffel formulas are hard coded.
Scalar fields are arbitrary vectorised callables ``f(P) -> (n,)`` that
must be smooth in the chart near the evaluation points (canonicalize
before calling, not inside ``f``).
"""

from __future__ import annotations

import numpy as np

from .. import backend, config
from ..errors import (
    CollapseReached,
    InputError,
    SingularLevelError,
    SingularMetricError,
    StepTooLarge,
)
from .manifolds import EndCondition, GeodesicPath, as_coords

_EVENT_KIND = {1: "left", 2: "right", 3: "wrap"}


def metric_at(manifold, p):
    """Metric matrix in chart coordinates, shape (d, d)."""
    P = np.atleast_2d(as_coords(p))
    g = backend.get_kernels().metric_batch(
        manifold.code.ints, manifold.code.floats, P
    )
    out = g[0] if np.asarray(p).ndim == 1 else g
    if not np.all(np.isfinite(out)):
        raise SingularMetricError("metric is not finite at the requested point")
    return out


def _event_label(manifold, code):
    side = _EVENT_KIND[int(code)]
    if side == "wrap":
        return "wrap"
    end = manifold.left if side == "left" else manifold.right
    return "collapse" if end == EndCondition.COLLAPSE else "mirror"


def integrate_geodesic_batch(
    manifold,
    P0,
    V0,
    t_end,
    step=config.GEODESIC_STEP,
    record_stride=1,
    order=4,
):
    """Raw batched RK4 integration; returns kernel output arrays."""
    P0 = np.atleast_2d(np.asarray(P0, dtype=np.float64))
    V0 = np.atleast_2d(np.asarray(V0, dtype=np.float64))
    if P0.shape != V0.shape:
        raise InputError("initial points and velocities must match in shape")
    n_steps = max(1, int(round(t_end / step)))
    n_steps = ((n_steps + record_stride - 1) // record_stride) * record_stride
    actual_step = t_end / n_steps
    k = backend.get_kernels()
    traj, vel, energy, events, n_events = k.geodesic_batch(
        manifold.code.ints,
        manifold.code.floats,
        P0,
        V0,
        actual_step,
        n_steps,
        config.CHRISTOFFEL_STEP,
        order,
        record_stride,
    )
    times = np.linspace(0.0, t_end, n_steps // record_stride + 1)
    return times, traj, vel, energy, events, n_events


def integrate_geodesic(
    manifold,
    p0,
    v0,
    t_end,
    step=config.GEODESIC_STEP,
    record_stride=1,
    energy_guard=1e-3,
    raise_on_collapse=False,
):
    """Integrate the geodesic equation from ``(p0, v0)`` for time ``t_end``.

    Profile folds are crossed transparently: collapse ends continue
    antipodally and the crossing is recorded as an event.  Pass
    ``raise_on_collapse=True`` to get :class:`CollapseReached` instead.
    The relative energy drift along the path is guarded; a failure
    raises :class:`StepTooLarge` with a suggested step.
    """
    times, traj, vel, energy, events, n_events = integrate_geodesic_batch(
        manifold, [as_coords(p0)], [np.asarray(v0, dtype=np.float64)],
        t_end, step=step, record_stride=record_stride,
    )
    evs = [
        (float(events[0, i, 0]), _event_label(manifold, events[0, i, 1]))
        for i in range(int(n_events[0]))
    ]
    path = GeodesicPath(times, traj[0], vel[0], energy[0], evs)
    if raise_on_collapse:
        for t, kind in evs:
            if kind == "collapse":
                raise CollapseReached(t)
    drift = path.energy_drift()
    if energy_guard is not None and drift > energy_guard:
        raise StepTooLarge(drift, step / 2.0)
    return path


def normal_exponential(
    manifold,
    points,
    normals,
    t,
    past_collapse="raise",
):
    """Flow seed points a signed distance ``t`` along unit normals.

    Uses closed forms: straight chart lines on flat quotients and bundle
    fibers, exact interval folding on warped profiles.  Returns
    ``(points_t, events)`` where events is a list of ``(t_cross, kind)``
    shared by the whole front (profile folds).  ``past_collapse`` is one
    of ``"raise"``, ``"continue"``, ``"clip"``.
    """
    from ..bundles import BundleTotalSpace  # local import, avoids a cycle

    P = np.atleast_2d(as_coords(points)).astype(np.float64)
    N = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    if P.shape != N.shape:
        raise InputError("points and normals must have matching shapes")
    fam = int(manifold.code.ints[0])
    events: list = []

    if fam == 0:
        return P + t * N, events

    if isinstance(manifold, BundleTotalSpace):
        out = P.copy()
        u = P[:, manifold.fiber_slice]
        v = N[:, manifold.fiber_slice]
        radii = np.linalg.norm(u, axis=1)
        inward = np.einsum("ni,ni->n", u, v) < 0
        if manifold.rank >= 2 and t > 0 and np.any(inward & (radii < t)):
            t_star = float(np.min(radii[inward])) if np.any(inward) else t
            events.append((t_star, "collapse"))
            if past_collapse == "raise":
                raise CollapseReached(t_star)
            if past_collapse == "clip":
                t = t_star
        out[:, manifold.fiber_slice] = u + t * v
        return out, events

    # warped profile: all seeds share one radial level and march radially
    if not np.allclose(np.abs(N[:, 0]), 1.0, atol=1e-9) or np.any(
        np.abs(N[:, 1]) > 1e-9
    ):
        raise InputError("profile foil normals must be radial unit vectors")
    out = P.copy()
    r0 = P[:, 0]
    if not np.allclose(r0, r0[0], atol=1e-12):
        raise InputError("profile foil seeds must share a radial level")
    sign = N[0, 0]
    if not np.allclose(N[:, 0], sign):
        raise InputError("profile foil normals must share a side")
    r_t, shift, fold_events = manifold.fold_radial(float(r0[0]), sign * t)
    for t_cross, end in fold_events:
        kind = "collapse" if end == EndCondition.COLLAPSE else "mirror"
        events.append((t_cross, kind))
        if kind == "collapse":
            if past_collapse == "raise":
                raise CollapseReached(t_cross)
            if past_collapse == "clip":
                r_clip, shift_clip, _ = manifold.fold_radial(
                    float(r0[0]), sign * t_cross
                )
                out[:, 0] = r_clip
                out[:, 1] += shift_clip
                return out, events[: events.index((t_cross, kind)) + 1]
    out[:, 0] = r_t
    out[:, 1] += shift
    return out, events


def _hessian_stencil(f, P, h):
    """Evaluate f on a full second-order stencil around each point.

    Returns (fc, d1, d2): values, first and second chart partials.
    """
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n, d = P.shape
    pts = [P]
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        pts.append(P + e)
        pts.append(P - e)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    for i, j in pairs:
        ei = np.zeros(d)
        ei[i] = h
        ej = np.zeros(d)
        ej[j] = h
        pts.append(P + ei + ej)
        pts.append(P + ei - ej)
        pts.append(P - ei + ej)
        pts.append(P - ei - ej)
    stacked = np.concatenate(pts, axis=0)
    vals = np.asarray(f(stacked), dtype=np.float64)
    if vals.shape != (stacked.shape[0],):
        raise InputError("scalar field must return one value per point")
    blocks = vals.reshape(-1, n)
    fc = blocks[0]
    d1 = np.empty((n, d))
    d2 = np.empty((n, d, d))
    for i in range(d):
        fp = blocks[1 + 2 * i]
        fm = blocks[2 + 2 * i]
        d1[:, i] = (fp - fm) / (2.0 * h)
        d2[:, i, i] = (fp - 2.0 * fc + fm) / (h * h)
    base = 1 + 2 * d
    for idx, (i, j) in enumerate(pairs):
        fpp = blocks[base + 4 * idx]
        fpm = blocks[base + 4 * idx + 1]
        fmp = blocks[base + 4 * idx + 2]
        fmm = blocks[base + 4 * idx + 3]
        mixed = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
        d2[:, i, j] = mixed
        d2[:, j, i] = mixed
    return fc, d1, d2


def gradient_fd(manifold, f, P, h=config.DEFAULT_TOL.fd_step):
    """Riemannian gradient and its squared norm by central differences."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n, d = P.shape
    pts = [P]
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        pts.append(P + e)
        pts.append(P - e)
    vals = np.asarray(f(np.concatenate(pts, axis=0)), dtype=np.float64).reshape(-1, n)
    d1 = np.empty((n, d))
    for i in range(d):
        d1[:, i] = (vals[1 + 2 * i] - vals[2 + 2 * i]) / (2.0 * h)
    g = backend.get_kernels().metric_batch(manifold.code.ints, manifold.code.floats, P)
    ginv = np.linalg.inv(g)
    grad = np.einsum("nij,nj->ni", ginv, d1)
    norm2 = np.einsum("ni,nij,nj->n", d1, ginv, d1)
    return grad, norm2


def laplace_beltrami_fd(manifold, f, P, h=config.DEFAULT_TOL.fd_step):
    """Laplace-Beltrami operator via the trace of the covariant Hessian."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    k = backend.get_kernels()
    _, d1, d2 = _hessian_stencil(f, P, h)
    g = k.metric_batch(manifold.code.ints, manifold.code.floats, P)
    gam = k.christoffel_batch(manifold.code.ints, manifold.code.floats, P, h, 2)
    ginv = np.linalg.inv(g)
    hess = d2 - np.einsum("nkij,nk->nij", gam, d1)
    return np.einsum("nij,nij->n", ginv, hess)


def mean_curvature_level(
    manifold,
    f,
    p,
    b_value,
    b_prime,
    h=config.DEFAULT_TOL.fd_step,
    eps_reg=config.DEFAULT_TOL.regularity,
    consistency_rel=0.05,
):
    """Mean curvature of the level set of ``f`` through ``p``.

    Solves the divergence identity ``lap f = b'/2 - H sqrt(b)`` for H,
    with the Laplacian taken by finite differences.  ``b_value`` and
    ``b_prime`` are the declared squared-gradient profile and its
    derivative at the level of ``p``; the measured squared gradient must
    agree with ``b_value`` or the level data is rejected.
    """
    P = np.atleast_2d(as_coords(p))
    _, norm2 = gradient_fd(manifold, f, P, h)
    if np.any(np.sqrt(norm2) <= eps_reg):
        raise SingularLevelError(
            "level through the requested point is focal (|grad f| below threshold)"
        )
    mismatch = np.abs(norm2 - b_value)
    if np.any(mismatch > consistency_rel * np.abs(b_value) + 1e-6):
        raise InputError(
            f"declared b(f) = {b_value} inconsistent with measured |grad f|^2 "
            f"= {norm2}"
        )
    lap = laplace_beltrami_fd(manifold, f, P, h)
    H = (0.5 * b_prime - lap) / np.sqrt(b_value)
    return float(H[0]) if np.asarray(p).ndim == 1 else H


def tube_volume_density(
    manifold,
    curve,
    normal,
    s_values,
    t_values,
    step=config.GEODESIC_STEP,
    ds=1e-2,
):
    """Relative volume density of the normal flow of a parametrized curve.

    ``curve(s) -> (n, d)`` and ``normal(s) -> (n, d)`` give the seed curve
    and its unit normal field.  The flow is integrated as a batch of
    geodesics; the length element is measured by a fourth-order stencil
    in the curve parameter, and the density is normalised to 1 at t = 0.

    Returns an array of shape ``(len(t_values), len(s_values))``.
    """
    s_values = np.asarray(s_values, dtype=np.float64)
    t_values = np.asarray(t_values, dtype=np.float64)
    if np.any(t_values < 0):
        raise InputError("flow times must be nonnegative")
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * ds
    all_s = (s_values[None, :] + offsets[:, None]).reshape(-1)
    P0 = curve(all_s)
    V0 = normal(all_s)
    t_end = float(t_values.max())
    if t_end == 0.0:
        return np.ones((len(t_values), len(s_values)))
    times, traj, _, _, _, _ = integrate_geodesic_batch(
        manifold, P0, V0, t_end, step=step
    )
    idx = np.searchsorted(times, t_values)
    idx = np.clip(idx, 0, len(times) - 1)
    if np.max(np.abs(times[idx] - t_values)) > step:
        raise InputError("flow times must be representable on the step grid")
    n_s = len(s_values)
    lam = np.empty((len(t_values), n_s))
    k = backend.get_kernels()
    ref = None
    for row, i_t in enumerate(idx):
        pts = traj[:, i_t, :].reshape(4, n_s, -1)
        tangent = (pts[0] - 8.0 * pts[1] + 8.0 * pts[2] - pts[3]) / (12.0 * ds)
        center = 0.5 * (pts[1] + pts[2])
        g = k.metric_batch(manifold.code.ints, manifold.code.floats, center)
        lengths = np.sqrt(np.einsum("ni,nij,nj->n", tangent, g, tangent))
        if ref is None:
            base_pts = P0.reshape(4, n_s, -1)
            base_t = (
                base_pts[0] - 8.0 * base_pts[1] + 8.0 * base_pts[2] - base_pts[3]
            ) / (12.0 * ds)
            base_c = 0.5 * (base_pts[1] + base_pts[2])
            g0 = k.metric_batch(manifold.code.ints, manifold.code.floats, base_c)
            ref = np.sqrt(np.einsum("ni,nij,nj->n", base_t, g0, base_t))
        lam[row] = lengths / ref
    return lam
