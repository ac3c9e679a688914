"""Acceptance gate, one test per criterion.

Each test prints a single verdict line; tolerances appearing here are
the contract values, independent of the tighter library defaults.
"""

import math
import time

import numpy as np
import pytest

from transnormal_lab import cli
from transnormal_lab.backend import get_kernels
from transnormal_lab.bundles import squared_norm_function
from transnormal_lab.errors import InputError
from transnormal_lab.geometry.manifolds import FlatQuotient, WarpedProfile
from transnormal_lab.geometry.operators import (
    gradient_fd,
    integrate_geodesic,
    laplace_beltrami_fd,
    mean_curvature_level,
    tube_volume_density,
)
from transnormal_lab.presets import (
    SURGERY_PRESETS,
    build_bundle,
    get_preset,
    perturbed_variant,
    radial_wave,
)
from transnormal_lab.surgery import (
    moser_flatten,
    moser_isotopy,
    naive_glue_cmc_spread,
    preset_spec,
    run_preset,
    verify_foliation,
)
from transnormal_lab.transnormal import (
    BProfile,
    TransnormalFunction,
    build_transnormal_function,
    classify,
)
from transnormal_lab.verify import (
    flow_density_crosscheck,
    isoparametric_report,
    sample_points,
    transnormality_report,
)

TWO_PI = 2.0 * math.pi

TABLE_ROWS = {
    "plane": ("Planar", 0, 1, None),
    "cylinder": ("Cylindrical", 0, 0, None),
    "torus": ("Toric", 0, 0, 1.3),
    "moebius": ("TwistedCylindrical", 1, 0, None),
    "klein": ("KleinBottled", 2, 0, 1.3),
    "sphere": ("Spherical", 0, 2, math.pi),
    "projective-plane": ("RealProjective", 1, 1, math.pi / 2.0),
}


def _verdict(n, ok, msg):
    print(f"[criterion {n:02d}] {'PASS' if ok else 'FAIL'}  {msg}")
    assert ok, f"criterion {n:02d}: {msg}"


def test_c01_model_presets_classify_to_their_rows():
    t0 = time.monotonic()
    worst = ""
    ok = True
    for name, (tag, n_sr, n_s, width) in TABLE_ROWS.items():
        desc = classify(get_preset(name)())
        row_ok = desc.type_tag == tag and (desc.n_sr, desc.n_s) == (n_sr, n_s)
        if width is None:
            row_ok = row_ok and desc.injectivity_radius is None
        else:
            row_ok = row_ok and abs(desc.injectivity_radius - width) <= 1e-3
        if not row_ok:
            ok = False
            worst = f"{name} gave {desc.type_tag} {desc.n_sr},{desc.n_s}"
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 30.0
    _verdict(1, ok, worst or f"7 presets, widths to 1e-3, {elapsed:.1f}s < 30s")


def test_c02_special_foil_count_bounded_by_two():
    checked = 0
    worst = 0
    for name in TABLE_ROWS:
        worst = max(worst, classify(get_preset(name)()).n_c)
        checked += 1
    for name in ("torus", "klein", "sphere", "projective-plane"):
        for seed in range(20):
            m = perturbed_variant(name, strength=0.02, seed=seed)
            worst = max(worst, classify(m).n_c)
            checked += 1
    _verdict(2, worst <= 2, f"N_SR + N_S <= 2 on {checked} systems (max {worst})")


def test_c03_built_functions_pass_transnormality():
    worst_spread = 0.0
    worst_bin = 0.0
    for name in TABLE_ROWS:
        m = get_preset(name)()
        fn = build_transnormal_function(m, classify(m))
        rep = transnormality_report(m, fn, b_declared=fn.b)
        worst_spread = max(worst_spread, rep.max_spread)
        # compare the fitted profile to the declared one bin by bin; bin
        # means of b(f) shift by (b''/2) var(f) and are no use here
        fit = np.polynomial.polynomial.polyval(
            np.array([r["f_mean"] for r in rep.extras["bins"]]), rep.fit_coeffs
        )
        gap = max(float(np.max(np.abs(fit - [r["declared"] for r in rep.extras["bins"]]))),
                  rep.declared_mismatch)
        worst_bin = max(worst_bin, gap)
    ok = worst_spread <= 1e-3 and worst_bin <= 1e-3
    _verdict(3, ok, f"max bin spread {worst_spread:.1e}, "
                    f"declared-b gap {worst_bin:.1e} (tol 1e-3)")


def _bundle_analytic(bundle, fn, P):
    k = get_kernels()
    g = k.metric_batch(bundle.code.ints, bundle.code.floats, P)
    gam = k.christoffel_batch(bundle.code.ints, bundle.code.floats, P, 1e-3, 4)
    ginv = np.linalg.inv(g)
    df = fn.analytic_gradient(P)
    n2 = np.einsum("ni,nij,nj->n", df, ginv, df)
    hess = np.zeros((len(P), bundle.dim, bundle.dim))
    for i in range(bundle.dim)[bundle.fiber_slice]:
        hess[:, i, i] = 2.0
    lap = np.einsum("nij,nij->n", ginv, hess - np.einsum("nkij,nk->nij", gam, df))
    return n2, lap


def test_c04_bundle_identities_and_sphere_leaves():
    configs = [
        build_bundle(rank=1, omega=0.0),
        build_bundle(rank=1, mobius=True),
        build_bundle(rank=2, omega=0.3),
        build_bundle(rank=3, omega=0.3),
    ]
    worst_an = worst_fd = worst_h = 0.0
    for bundle in configs:
        fn = build_transnormal_function(bundle)
        P = sample_points(bundle, 1000)
        fv = fn(P)
        k = bundle.rank
        n2a, lapa = _bundle_analytic(bundle, squared_norm_function(bundle), P)
        worst_an = max(worst_an, float(np.max(np.abs(n2a - 4.0 * fv))),
                       float(np.max(np.abs(lapa - 2.0 * k))))
        _, n2 = gradient_fd(bundle, fn, P)
        lap = laplace_beltrami_fd(bundle, fn, P)
        worst_fd = max(worst_fd, float(np.max(np.abs(n2 - 4.0 * fv))),
                       float(np.max(np.abs(lap - 2.0 * k))))
        from transnormal_lab.bundles import sphere_bundle_mean_curvature

        for r in (0.25, 0.5, 1.0, 2.0):
            mean_h, _ = sphere_bundle_mean_curvature(bundle, radius=r)
            worst_h = max(worst_h, abs(mean_h - (-(k - 1) / r)))
    ok = worst_an <= 1e-6 and worst_fd <= 1e-3 and worst_h <= 1e-3
    _verdict(4, ok, f"analytic {worst_an:.1e} (tol 1e-6), FD {worst_fd:.1e} "
                    f"(tol 1e-3), sphere-leaf H {worst_h:.1e} (tol 1e-3)")


def test_c05_geodesic_energy_and_great_circle():
    runs = [
        (WarpedProfile.sphere(), [1.1, 0.3], [0.6, 0.9], 3.0),
        (FlatQuotient.torus(), [1.0, 0.5], [0.3, 1.1], 3.0),
        (FlatQuotient.klein(), [0.7, 1.3], [-0.8, 0.4], 3.0),
    ]
    worst_drift = 0.0
    for m, p0, v0, t_end in runs:
        worst_drift = max(worst_drift, integrate_geodesic(m, p0, v0, t_end).energy_drift())
    m = WarpedProfile.sphere()
    start = np.array([math.pi / 2.0, 1.2])
    path = integrate_geodesic(m, start, [0.0, 1.0], t_end=TWO_PI)
    worst_drift = max(worst_drift, path.energy_drift())
    end = m.canonicalize(path.endpoint)[0]
    gap = np.abs(end - start)
    gap[1] = min(gap[1], TWO_PI - gap[1])
    closure = float(np.max(gap))
    ok = worst_drift <= 1e-8 and closure <= 1e-6
    _verdict(5, ok, f"energy drift {worst_drift:.1e} (tol 1e-8), "
                    f"equator closure {closure:.1e} (tol 1e-6)")


def test_c06_flow_density_matches_mean_curvature():
    t_grid = np.linspace(0.0, 0.3, 31)
    worst = 0.0
    cases = []
    cyl = get_preset("cylinder")()
    cases.append((cyl, build_transnormal_function(cyl, classify(cyl)), (0.3, 0.5)))
    plane = get_preset("plane")()
    cases.append((plane, build_transnormal_function(plane, classify(plane)), (1.0, 0.0)))
    sph = get_preset("sphere")()
    cases.append((sph, build_transnormal_function(sph, classify(sph)), (math.pi / 2.0, 0.4)))
    for m, fn, seed in cases:
        worst = max(worst, flow_density_crosscheck(m, fn, seed, t_grid))

    # closed-form densities for the three model flows
    t_vals = np.array([0.25, 0.5, 0.75, 1.0])
    lam = tube_volume_density(
        cyl,
        lambda s: np.column_stack([s * TWO_PI, np.zeros_like(s)]),
        lambda s: np.column_stack([np.zeros_like(s), np.ones_like(s)]),
        np.linspace(-0.4, 0.4, 17), t_vals,
    )
    lam_err = float(np.max(np.abs(lam - 1.0)))
    circle = lambda s: np.column_stack([np.cos(s), np.sin(s)])
    lam = tube_volume_density(plane, circle, circle,
                              np.linspace(-1.5, 1.5, 17), t_vals)
    lam_err = max(lam_err, float(np.max(np.abs(lam - (1.0 + t_vals)[:, None]))))
    lam = tube_volume_density(
        sph,
        lambda s: np.column_stack([np.full_like(s, math.pi / 2.0), s]),
        lambda s: np.column_stack([-np.ones_like(s), np.zeros_like(s)]),
        np.linspace(0.5, 2.5, 17), t_vals,
    )
    lam_err = max(lam_err, float(np.max(np.abs(lam - np.cos(t_vals)[:, None]))))
    ok = worst <= 1e-3 and lam_err <= 1e-6
    _verdict(6, ok, f"d/dt log density + H within {worst:.1e} (tol 1e-3), "
                    f"closed-form density error {lam_err:.1e} (tol 1e-6)")


def test_c07_moser_flattening_on_the_circle():
    rho = lambda th: 1.0 + 0.5 * np.cos(th)
    _, _, residual = moser_flatten(rho, TWO_PI)
    steps = moser_isotopy(rho, TWO_PI)
    probe = np.linspace(0.0, TWO_PI, 513)
    id_err = float(np.max(np.abs(steps[0][1](probe) - probe)))
    h = 1e-5
    inner = probe[1:-1]
    monotone = all(
        np.all((chi(inner + h) - chi(inner - h)) > 0.0) for _, chi, _ in steps
    )
    ok = residual <= 1e-8 and id_err <= 1e-12 and monotone
    _verdict(7, ok, f"pushforward residual {residual:.1e} (tol 1e-8), "
                    f"chi_0 = id to {id_err:.1e}, all stages increasing")


def test_c08_surgery_before_and_after():
    torus = run_preset(SURGERY_PRESETS["torus-two-cylinders"])
    before, _ = naive_glue_cmc_spread(preset_spec(SURGERY_PRESETS["torus-two-cylinders"]))
    before = float(np.max(before))
    after = verify_foliation(torus)["cmc_spread"]

    klein = run_preset(SURGERY_PRESETS["klein-two-moebius"])
    krep = verify_foliation(klein)
    sup_h = max(abs(row["H"]) for row in krep["leaves"])

    sphere = run_preset(SURGERY_PRESETS["sphere-two-disks"])
    srep = verify_foliation(sphere)
    m = sphere.manifold
    fn = build_transnormal_function(m, classify(m))
    P = sample_points(m, 200, margin=0.15)
    fv = fn(P)
    lap = laplace_beltrami_fd(m, fn, P)
    ident = 0.0
    for p, f, lp in zip(P, fv, lap):
        b = float(fn.b(f))
        bp = float(fn.b.derivative(f))
        H = mean_curvature_level(m, fn, p, b, bp)
        ident = max(ident, abs(lp - (0.5 * bp - H * math.sqrt(b))))

    ok = (before > 1e-2 and after <= 1e-3 and sup_h <= 1e-3
          and srep["cmc_spread"] <= 1e-3 and ident <= 1e-3)
    _verdict(8, ok, f"naive glue spread {before:.3f} > 1e-2, flattened "
                    f"{after:.1e} <= 1e-3; klein sup|H| {sup_h:.1e}; sphere "
                    f"CMC {srep['cmc_spread']:.1e}, laplacian identity {ident:.1e}")


def test_c09_wave_demo_splits_the_two_notions(tmp_path):
    m, fn = radial_wave()
    rep_t = transnormality_report(m, fn, b_declared=fn.b)
    rep_i = isoparametric_report(m, fn, b_declared=fn.b)
    hs = []
    for r in (0.095, TWO_PI - 0.1):
        f = fn(np.array([r, 0.0]))
        hs.append(float(mean_curvature_level(
            m, fn, np.array([r, 0.0]), float(fn.b(f)), float(fn.b.derivative(f))
        )))
    gap = abs(hs[0] - hs[1])
    rc = cli.main(["wave-demo", "--out", str(tmp_path), "--no-timestamp"])
    ok = (rep_t.passed and rep_t.max_spread <= 1e-3 and not rep_i.passed
          and gap > 10.0 and rc == 3)
    _verdict(9, ok, f"transnormal spread {rep_t.max_spread:.1e} passes, "
                    f"isoparametric fails, H gap {gap:.1f} > 10, exit {rc}")


def test_c10_every_report_type_has_a_failing_input():
    plane = get_preset("plane")()

    def skew(pts):
        return pts[:, 0] + pts[:, 1] ** 2

    impostor = TransnormalFunction(
        "C", BProfile(1.0, 0.0, 0.0, -math.inf, math.inf), None, skew, "impostor"
    )
    t_fails = not transnormality_report(plane, impostor).passed

    m, wave = radial_wave()
    i_fails = not isoparametric_report(m, wave, b_declared=wave.b).passed

    res = run_preset(SURGERY_PRESETS["torus-two-cylinders"])
    skewed = res.profile * (1.0 + 0.05 * np.sin(math.pi * res.r_grid))
    res.manifold = WarpedProfile.from_profile(
        res.r_grid, skewed * res.fiber_density, res.spec.fiber_len,
        res.manifold.left, res.manifold.right, label="tampered",
    )
    f_fails = verify_foliation(res)["model_mismatch"] > 1e-3

    with pytest.raises(InputError):
        flow_density_crosscheck(plane, impostor, (0.4, 0.7),
                                np.linspace(0.0, 0.2, 21))
    ok = t_fails and i_fails and f_fails
    _verdict(10, ok, "transnormality, isoparametric, foliation and "
                     "crosscheck reports all reject a broken input")
