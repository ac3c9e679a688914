"""Euclidean bundle metrics: the squared-norm identities and holonomy.

The analytic route contracts the exact chart gradient and Hessian of
f = |u|^2 with the kernel metric and Christoffel symbols; the finite
difference route uses the generic operators.  Both must recover
|grad f|^2 = 4 f and lap f = 2k on every admissible connection.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from transnormal_lab.backend import get_kernels
from transnormal_lab.bundles import (
    constant_connection_holonomy,
    horizontal_lift,
    loop_holonomy,
    rotation_generator,
    sphere_bundle_mean_curvature,
    squared_norm_function,
)
from transnormal_lab.errors import InputError
from transnormal_lab.geometry.operators import gradient_fd, laplace_beltrami_fd
from transnormal_lab.presets import build_bundle

N_POINTS = 1000
ANALYTIC_TOL = 1e-6
FD_TOL = 1e-3

CONFIGS = [
    ("k1 trivial", dict(rank=1, omega=0.0)),
    ("k1 moebius", dict(rank=1, omega=0.0, mobius=True)),
    ("k2 trivial", dict(rank=2, omega=0.0)),
    ("k2 twisted", dict(rank=2, omega=0.3)),
    ("k3 twisted", dict(rank=3, omega=0.3)),
]


def _points(bundle, n, seed=5):
    rng = np.random.default_rng(seed)
    window = bundle.chart_window()
    lo = np.array([w[0] for w in window])
    hi = np.array([w[1] for w in window])
    span = hi - lo
    return lo + 0.05 * span + 0.9 * span * rng.random((n, len(lo)))


def _analytic_paths(bundle, fn, P):
    """(|grad f|^2, lap f) from exact chart derivatives of f."""
    k = get_kernels()
    g = k.metric_batch(bundle.code.ints, bundle.code.floats, P)
    gam = k.christoffel_batch(bundle.code.ints, bundle.code.floats, P, 1e-3, 4)
    ginv = np.linalg.inv(g)
    df = fn.analytic_gradient(P)
    n2 = np.einsum("ni,nij,nj->n", df, ginv, df)
    hess = np.zeros((len(P), bundle.dim, bundle.dim))
    for i in range(bundle.dim)[bundle.fiber_slice]:
        hess[:, i, i] = 2.0
    corr = np.einsum("nkij,nk->nij", gam, df)
    lap = np.einsum("nij,nij->n", ginv, hess - corr)
    return n2, lap


def test_squared_norm_identities_all_configs():
    for name, kw in CONFIGS:
        bundle = build_bundle(**kw)
        fn = squared_norm_function(bundle)
        P = _points(bundle, N_POINTS)
        fv = fn(P)

        n2_a, lap_a = _analytic_paths(bundle, fn, P)
        err_b = np.max(np.abs(n2_a - 4.0 * fv))
        err_a = np.max(np.abs(lap_a - 2.0 * bundle.rank))
        assert err_b <= ANALYTIC_TOL, f"{name}: analytic |grad f|^2 {err_b:.2e}"
        assert err_a <= ANALYTIC_TOL, f"{name}: analytic lap {err_a:.2e}"

        _, n2_fd = gradient_fd(bundle, fn, P)
        lap_fd = laplace_beltrami_fd(bundle, fn, P)
        err_b = np.max(np.abs(n2_fd - 4.0 * fv))
        err_a = np.max(np.abs(lap_fd - 2.0 * bundle.rank))
        assert err_b <= FD_TOL, f"{name}: FD |grad f|^2 {err_b:.2e}"
        assert err_a <= FD_TOL, f"{name}: FD lap {err_a:.2e}"


def test_sphere_bundle_mean_curvature_law():
    for name, kw in CONFIGS:
        bundle = build_bundle(**kw)
        k = bundle.rank
        for r in (0.25, 0.5, 1.0, 2.0):
            mean_h, spread = sphere_bundle_mean_curvature(bundle, radius=r)
            expect = -(k - 1) / r
            assert abs(mean_h - expect) <= 1e-3, (
                f"{name} r={r}: H {mean_h:.6f} expect {expect:.6f}"
            )
            assert spread <= 1e-3, f"{name} r={r}: spread {spread:.2e}"


def test_loop_holonomy_matches_matrix_exponential():
    for name, kw in CONFIGS:
        bundle = build_bundle(**kw)
        got = loop_holonomy(bundle)
        want = constant_connection_holonomy(bundle)
        err = np.max(np.abs(got - want))
        assert err <= 1e-6, f"{name}: holonomy error {err:.2e}"


def test_moebius_holonomy_is_minus_one():
    bundle = build_bundle(rank=1, mobius=True)
    got = loop_holonomy(bundle)
    assert abs(float(got[0, 0]) + 1.0) <= 1e-9


def test_twisted_holonomy_rotation_angle():
    omega, L = 0.3, 2.0 * math.pi
    bundle = build_bundle(rank=2, omega=omega, base_length=L)
    got = loop_holonomy(bundle)
    ang = -omega * L  # A = omega J integrated along the full base circle
    want = np.array([
        [math.cos(ang), -math.sin(ang)],
        [math.sin(ang), math.cos(ang)],
    ])
    assert np.max(np.abs(got - want)) <= 1e-6


def test_horizontal_lift_solves_transport():
    omega = 0.3
    bundle = build_bundle(rank=2, omega=omega)
    A = omega * rotation_generator(2)
    u0 = np.array([1.0, 0.4])
    t_grid = np.linspace(0.0, 4.0, 801)
    lift = horizontal_lift(bundle, lambda t: t, u0, t_grid)
    for i in (200, 500, 800):
        want = expm(-A * t_grid[i]) @ u0
        assert np.max(np.abs(lift[i] - want)) <= 1e-8

    # horizontal transport preserves the fiber norm for skew A
    norms = np.linalg.norm(np.asarray(lift), axis=1)
    assert np.max(np.abs(norms - np.linalg.norm(u0))) <= 1e-8


def test_mobius_with_higher_rank_rejected():
    with pytest.raises(InputError):
        build_bundle(rank=2, mobius=True)
