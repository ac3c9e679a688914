"""Differential operators against closed-form geometry.

Oracles are hand-derived: warped-product Christoffel symbols, round
sphere curvature, flat-chart tube densities 1, 1+t and cos t.
"""

import math

import numpy as np
import pytest

from transnormal_lab.errors import (
    CollapseReached,
    InputError,
    SingularLevelError,
    StepTooLarge,
)
from transnormal_lab.geometry.manifolds import FlatQuotient, WarpedProfile
from transnormal_lab.geometry.operators import (
    gradient_fd,
    integrate_geodesic,
    laplace_beltrami_fd,
    mean_curvature_level,
    normal_exponential,
    tube_volume_density,
)


def test_christoffel_warped_closed_form():
    # dr^2 + sin(r)^2 dth^2 has Gamma^r_thth = -sin cos, Gamma^th_rth = cot
    from transnormal_lab.backend import get_kernels

    m = WarpedProfile.sphere()
    k = get_kernels()
    P = np.array([[0.9, 2.0], [1.7, 0.3], [2.4, 5.0]])
    gam = k.christoffel_batch(m.code.ints, m.code.floats, P, 1e-4, 4)
    for row, (r, _) in zip(gam, P):
        assert abs(row[0, 1, 1] + math.sin(r) * math.cos(r)) <= 1e-8
        assert abs(row[1, 0, 1] - math.cos(r) / math.sin(r)) <= 1e-8
        assert abs(row[0, 0, 0]) <= 1e-9


def test_gradient_fd_converges_at_second_order():
    m = FlatQuotient.plane()

    def f(P):
        return np.sin(P[:, 0]) * np.cos(2.0 * P[:, 1])

    P = np.array([[0.3, 0.7], [1.1, -0.4]])
    gx = np.cos(P[:, 0]) * np.cos(2.0 * P[:, 1])
    gy = -2.0 * np.sin(P[:, 0]) * np.sin(2.0 * P[:, 1])
    exact = gx**2 + gy**2
    errs = []
    for h in (2e-2, 1e-2, 5e-3):
        _, n2 = gradient_fd(m, f, P, h=h)
        errs.append(np.max(np.abs(n2 - exact)))
    # central stencil: halving h cuts the error by ~4
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


def test_laplacian_on_round_sphere():
    m = WarpedProfile.sphere()

    def f(P):
        return np.cos(P[:, 0])

    P = np.column_stack([
        np.linspace(0.4, 2.7, 25),
        np.linspace(0.1, 6.0, 25),
    ])
    lap = laplace_beltrami_fd(m, f, P)
    assert np.max(np.abs(lap + 2.0 * np.cos(P[:, 0]))) <= 1e-6


def test_mean_curvature_of_latitude_circle():
    # distance sphere of radius pi/4 about the pole has H = cot(pi/4) = 1
    # with respect to the inward normal grad f for f = cos r
    m = WarpedProfile.sphere()

    def f(P):
        return np.cos(P[:, 0])

    r = math.pi / 4.0
    fv = math.cos(r)
    H = mean_curvature_level(
        m, f, np.array([r, 1.0]),
        b_value=1.0 - fv * fv, b_prime=-2.0 * fv,
    )
    assert abs(float(np.ravel(H)[0]) - 1.0) <= 1e-6


def test_mean_curvature_rejects_focal_level():
    m = WarpedProfile.sphere()

    def f(P):
        return np.cos(P[:, 0])

    with pytest.raises(SingularLevelError):
        mean_curvature_level(m, f, np.array([1e-9, 0.0]),
                             b_value=0.0, b_prime=-2.0)


def test_geodesic_energy_drift_small():
    cases = [
        (WarpedProfile.sphere(), [1.1, 0.3], [0.6, 0.9]),
        (FlatQuotient.torus(), [1.0, 0.5], [0.3, 1.1]),
        (FlatQuotient.klein(), [0.7, 1.3], [-0.8, 0.4]),
    ]
    for m, p0, v0 in cases:
        path = integrate_geodesic(m, p0, v0, t_end=3.0)
        assert path.energy_drift() <= 1e-8, m.label


def test_great_circle_closes():
    m = WarpedProfile.sphere()
    # the equator is a unit-speed geodesic of length 2 pi
    start = np.array([math.pi / 2.0, 1.2])
    path = integrate_geodesic(m, start, [0.0, 1.0], t_end=2.0 * math.pi)
    assert path.energy_drift() <= 1e-8
    end = m.canonicalize(path.endpoint)[0]
    gap = np.abs(end - start)
    gap[1] = min(gap[1], 2.0 * math.pi - gap[1])
    assert np.max(gap) <= 1e-6, f"closure gap {gap}"


def test_meridian_circle_closes_through_poles():
    m = WarpedProfile.sphere()
    start = np.array([math.pi / 2.0, 0.7])
    path = integrate_geodesic(m, start, [1.0, 0.0], t_end=2.0 * math.pi)
    kinds = [kind for _, kind in path.events]
    assert kinds.count("collapse") == 2
    end = m.canonicalize(path.endpoint)[0]
    gap = np.abs(end - start)
    gap[1] = min(gap[1], 2.0 * math.pi - gap[1])
    assert np.max(gap) <= 1e-5, f"meridian gap {gap}"


def test_step_too_large_raises():
    m = WarpedProfile.sphere()
    with pytest.raises(StepTooLarge):
        integrate_geodesic(m, [0.3, 0.1], [1.0, 2.5], t_end=2.0,
                           step=0.45, energy_guard=1e-10)


def test_collapse_reached_raises_on_request():
    m = WarpedProfile.sphere()
    with pytest.raises(CollapseReached):
        integrate_geodesic(m, [0.5, 0.0], [-1.0, 0.0], t_end=1.0,
                           raise_on_collapse=True)


def test_normal_exponential_radial():
    m = WarpedProfile.sphere()

    def f(P):
        return np.cos(P[:, 0])

    p = np.array([[1.2, 0.4]])
    grad, n2 = gradient_fd(m, f, p)
    nu = grad / np.sqrt(n2)[:, None]
    q, _ = normal_exponential(m, p, nu, 0.5)
    # grad f points toward the near pole; r decreases at unit rate
    assert abs(q[0, 0] - 0.7) <= 1e-8
    assert abs(q[0, 1] - 0.4) <= 1e-8


def test_tube_density_closed_forms():
    two_pi = 2.0 * math.pi
    t_vals = np.array([0.25, 0.5, 0.75, 1.0])

    # flat cylinder, horizontal circle: parallel circles, lambda = 1
    cyl = FlatQuotient.cylinder()
    lam = tube_volume_density(
        cyl,
        lambda s: np.column_stack([s * two_pi, np.zeros_like(s)]),
        lambda s: np.column_stack([np.zeros_like(s), np.ones_like(s)]),
        np.linspace(-0.4, 0.4, 17),
        t_vals,
    )
    assert np.max(np.abs(lam - 1.0)) <= 1e-6

    # plane, unit circle flowed outward: lambda = 1 + t
    plane = FlatQuotient.plane()

    def circle(s):
        return np.column_stack([np.cos(s), np.sin(s)])

    lam = tube_volume_density(
        plane, circle, circle, np.linspace(-1.5, 1.5, 17), t_vals,
    )
    err = np.max(np.abs(lam - (1.0 + t_vals)[:, None]))
    assert err <= 1e-6, f"plane radial density error {err:.2e}"

    # sphere, equator flowed toward a pole: lambda = cos t
    sph = WarpedProfile.sphere()
    lam = tube_volume_density(
        sph,
        lambda s: np.column_stack([np.full_like(s, math.pi / 2.0), s]),
        lambda s: np.column_stack([-np.ones_like(s), np.zeros_like(s)]),
        np.linspace(0.5, 2.5, 17),
        t_vals,
    )
    err = np.max(np.abs(lam - np.cos(t_vals)[:, None]))
    assert err <= 1e-6, f"sphere equator density error {err:.2e}"
