"""Statistical certification reports, positive and negative controls.

Every report type gets at least one input built to fail, so a silent
"always pass" regression cannot survive the suite.
"""

import math

import numpy as np
import pytest

from transnormal_lab.errors import InputError, InsufficientSamples
from transnormal_lab.geometry.manifolds import WarpedProfile
from transnormal_lab.presets import SURGERY_PRESETS, get_preset, radial_wave
from transnormal_lab.surgery import (
    naive_glue_cmc_spread,
    preset_spec,
    run_preset,
    verify_foliation,
)
from transnormal_lab.transnormal import BProfile, TransnormalFunction, build_transnormal_function, classify
from transnormal_lab.verify import (
    flow_density_crosscheck,
    isoparametric_report,
    refinement_curve,
    sample_points,
    transnormality_report,
)


def _preset_fn(name):
    m = get_preset(name)()
    return m, build_transnormal_function(m, classify(m))


def _impostor_on_plane():
    """f = x + y^2 has |grad f|^2 = 1 + 4 y^2, not a function of f."""
    m = get_preset("plane")()

    def ev(pts):
        return pts[:, 0] + pts[:, 1] ** 2

    fn = TransnormalFunction(
        "C", BProfile(1.0, 0.0, 0.0, -math.inf, math.inf), None, ev, "impostor"
    )
    return m, fn


def test_transnormality_positive_controls():
    for name in ("sphere", "torus", "klein"):
        m, fn = _preset_fn(name)
        rep = transnormality_report(m, fn, b_declared=fn.b)
        assert rep.passed, name
        assert rep.max_spread <= rep.spread_tol, name
        assert rep.declared_mismatch <= 1e-6, name


def test_transnormality_catches_level_mixing():
    m, fn = _impostor_on_plane()
    rep = transnormality_report(m, fn)
    assert not rep.passed
    assert rep.max_spread > 0.1


def test_transnormality_catches_fiber_dependence():
    # cos r plus an angular ripple is no longer constant on its levels
    m = get_preset("sphere")()

    def ev(pts):
        return np.cos(pts[:, 0]) + 0.1 * np.sin(pts[:, 1])

    fn = TransnormalFunction(
        "B", BProfile(1.0, 0.0, -1.0, -1.1, 1.1), None, ev, "rippled"
    )
    rep = transnormality_report(m, fn)
    assert not rep.passed
    assert rep.max_spread > 1e-2


def test_isoparametric_positive_and_negative():
    m, fn = _preset_fn("sphere")
    rep = isoparametric_report(m, fn, b_declared=fn.b, a_declared=fn.a)
    assert rep.passed
    assert rep.extras["lap_spread"] <= rep.extras["lap_spread_tol"]
    assert rep.extras["lap_declared_mismatch"] <= 1e-5

    # the plane radial wave is transnormal but its Laplacian mixes levels
    m, fn = radial_wave()
    ok = transnormality_report(m, fn, b_declared=fn.b)
    bad = isoparametric_report(m, fn, b_declared=fn.b)
    assert ok.passed
    assert not bad.passed
    assert bad.extras["lap_spread"] > 0.1


def test_foliation_positive_and_tampered():
    res = run_preset(SURGERY_PRESETS["torus-two-cylinders"])
    rep = verify_foliation(res)
    assert rep["cmc_spread"] <= 1e-6
    assert rep["model_mismatch"] <= 1e-5
    assert rep["moser_ok"]

    # swap in a manifold whose warp disagrees with the recorded profile
    res2 = run_preset(SURGERY_PRESETS["torus-two-cylinders"])
    skew = res2.profile * (1.0 + 0.05 * np.sin(math.pi * res2.r_grid))
    res2.manifold = WarpedProfile.from_profile(
        res2.r_grid, skew * res2.fiber_density, res2.spec.fiber_len,
        res2.manifold.left, res2.manifold.right, label="tampered",
    )
    rep2 = verify_foliation(res2)
    assert rep2["model_mismatch"] > 1e-2


def test_naive_glue_is_not_cmc():
    stds, _ = naive_glue_cmc_spread(preset_spec(SURGERY_PRESETS["torus-two-cylinders"]))
    assert float(np.max(stds)) > 1e-2


def test_crosscheck_rejects_impostor():
    m, fn = _impostor_on_plane()
    with pytest.raises(InputError):
        flow_density_crosscheck(m, fn, (0.4, 0.7), np.linspace(0.0, 0.2, 21))


def test_crosscheck_small_residual_on_cylinder():
    m, fn = _preset_fn("cylinder")
    worst = flow_density_crosscheck(m, fn, (0.3, 0.5), np.linspace(0.0, 0.3, 31))
    assert worst <= 1e-3


def test_insufficient_samples_is_loud():
    m, fn = _preset_fn("torus")
    with pytest.raises(InsufficientSamples):
        transnormality_report(m, fn, n_samples=100, n_bins=64)


def test_refinement_separates_genuine_from_impostor():
    m, fn = _preset_fn("sphere")
    curve = refinement_curve(m, fn, [512, 1024, 2048])
    assert all(s <= 1e-6 for _, s in curve)
    m, fn = _impostor_on_plane()
    curve = refinement_curve(m, fn, [512, 1024, 2048])
    assert all(s > 0.1 for _, s in curve)


def test_report_dict_follows_schema():
    m, fn = _preset_fn("torus")
    d = transnormality_report(m, fn, b_declared=fn.b).as_dict()
    for key in ("test", "n", "n_bins", "max_spread", "tol", "pass", "bins"):
        assert key in d, key
    assert d["test"] == "transnormal"
    assert d["n"] == 4096
    row = d["bins"][0]
    for key in ("f_lo", "f_hi", "mean", "spread", "count", "declared"):
        assert key in row, key
    assert d["bins"] == sorted(d["bins"], key=lambda r: r["f_lo"])

    di = isoparametric_report(m, fn, a_declared=fn.a).as_dict()
    assert di["test"] == "isoparametric"
    for key in ("lap_bins", "lap_spread", "lap_spread_tol", "lap_declared_mismatch"):
        assert key in di, key


def test_sample_points_deterministic_and_bounded():
    m = get_preset("torus")()
    a = sample_points(m, 256)
    b = sample_points(m, 256)
    assert np.array_equal(a, b)
    window = m.chart_window()
    for j, (lo, hi) in enumerate(window):
        assert np.all(a[:, j] >= lo) and np.all(a[:, j] <= hi)
    shifted = sample_points(m, 256, skip=256)
    assert not np.allclose(a, shifted)
