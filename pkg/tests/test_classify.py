"""Classification of the model systems and the marching machinery behind it.

Expected rows for the seven presets (type, N_SR, N_S, T, D); None means
the leaf space is a ray or line and no finite width exists.
"""

import math

import numpy as np
import pytest

from transnormal_lab.errors import HorizonExceeded
from transnormal_lab.geometry.manifolds import FlatQuotient
from transnormal_lab.presets import (
    CLASSIFICATION_PRESETS,
    build_bundle,
    get_preset,
    perturbed_variant,
    seed_grid,
)
from transnormal_lab.transnormal import (
    DR,
    S,
    SR,
    CrossMatch,
    Foil,
    MirrorAt,
    NoMatch,
    Period,
    classify,
    detect_identification,
    foil_census,
    normal_bundle_connectivity,
)

TABLE = {
    "plane": ("Planar", 0, 1, None),
    "cylinder": ("Cylindrical", 0, 0, None),
    "torus": ("Toric", 0, 0, 1.3),
    "moebius": ("TwistedCylindrical", 1, 0, None),
    "klein": ("KleinBottled", 2, 0, 1.3),
    "sphere": ("Spherical", 0, 2, math.pi),
    "projective-plane": ("RealProjective", 1, 1, math.pi / 2.0),
}


def test_model_table_rows():
    for name, (tag, n_sr, n_s, width) in TABLE.items():
        desc = classify(get_preset(name)())
        assert desc.type_tag == tag, name
        assert (desc.n_sr, desc.n_s) == (n_sr, n_s), name
        assert not desc.horizon_limited, name
        if width is None:
            assert desc.diameter is None and desc.injectivity_radius is None, name
        else:
            assert abs(desc.diameter - width) <= 1e-3, name
            # the leaf-space width doubles as the period scale
            assert desc.injectivity_radius == desc.diameter, name


def test_foil_count_bound_holds_under_perturbation():
    for name in ("torus", "klein", "sphere", "projective-plane"):
        base = TABLE[name]
        for seed in range(3):
            m = perturbed_variant(name, strength=0.02, seed=seed)
            desc = classify(m)
            assert desc.n_c <= 2, f"{name} seed {seed}"
            assert desc.type_tag == base[0], f"{name} seed {seed}"


def test_seed_grid_gives_same_answer():
    for name in CLASSIFICATION_PRESETS:
        m = get_preset(name)()
        ref = classify(m)
        for alt in seed_grid(m):
            desc = classify(m, seed=alt)
            assert desc.type_tag == ref.type_tag, name
            assert (desc.n_sr, desc.n_s) == (ref.n_sr, ref.n_s), name
            if ref.diameter is not None:
                assert abs(desc.diameter - ref.diameter) <= 1e-6, name


def test_horizon_cut_raises_with_partial_descriptor():
    for name in ("torus", "sphere"):
        with pytest.raises(HorizonExceeded) as info:
            classify(get_preset(name)(), t_max=0.5)
        partial = info.value.partial
        assert partial.horizon_limited
        assert partial.type_tag == "Unresolved"
        assert partial.diameter is None


def test_open_sides_are_certified_not_horizon_limited():
    # deck-group reasoning resolves open ends at any finite march budget
    for name in ("plane", "cylinder", "moebius"):
        desc = classify(get_preset(name)(), t_max=0.25)
        assert not desc.horizon_limited, name
        assert desc.type_tag == TABLE[name][0], name


def test_identification_period_on_torus():
    m = get_preset("torus")()
    foil = Foil(m, ("horizontal", m.y_period / 6.0))
    wave = foil.wave(+1.0)
    out = detect_identification(m, wave, 0.3, wave, 0.3 + m.y_period)
    assert isinstance(out, Period)
    assert abs(out.period - m.y_period) <= 1e-9


def test_identification_cross_on_torus():
    m = get_preset("torus")()
    foil = Foil(m, ("horizontal", m.y_period / 6.0))
    half = m.y_period / 2.0
    out = detect_identification(m, foil.wave(+1.0), half, foil.wave(-1.0), half)
    assert isinstance(out, CrossMatch)
    assert abs(out.t - half) <= 1e-9


def test_identification_mirror_on_moebius():
    m = get_preset("moebius")()
    foil = Foil(m, ("horizontal", 0.4))
    wave = foil.wave(-1.0)  # march the strands toward the core
    out = detect_identification(m, wave, 0.4 - 0.05, wave, 0.4 + 0.05)
    assert isinstance(out, MirrorAt)
    assert abs(out.t - 0.4) <= 1e-9


def test_identification_no_match_for_distinct_levels():
    m = get_preset("torus")()
    foil = Foil(m, ("horizontal", m.y_period / 6.0))
    wave = foil.wave(+1.0)
    out = detect_identification(m, wave, 0.3, wave, 0.7)
    assert isinstance(out, NoMatch)
    assert out.residual > 0.1


def test_census_marks_special_levels():
    sphere = get_preset("sphere")()
    desc = classify(sphere)
    rows = foil_census(sphere, desc, [0.0, 1.0, math.pi])
    assert [r["kind"] for r in rows] == [S, DR, S]

    klein = get_preset("klein")()
    desc = classify(klein)
    # census parameters are signed: one mirror sits on each marching side
    mirrors = sorted(f["t"] for f in desc.foils if f["kind"] == SR)
    assert len(mirrors) == 2 and mirrors[0] < 0.0 < mirrors[1]
    rows = foil_census(klein, desc, [mirrors[0], mirrors[1], mirrors[1] + 0.1])
    assert [r["kind"] for r in rows] == [SR, SR, DR]


def test_normal_bundle_connectivity_by_kind():
    sphere = get_preset("sphere")()
    torus = get_preset("torus")()
    moebius = get_preset("moebius")()
    assert normal_bundle_connectivity(Foil(sphere, ("pole", "left"))) == "focal_sphere"
    assert normal_bundle_connectivity(Foil(torus, ("horizontal", 0.4))) == "two_sided"
    assert normal_bundle_connectivity(Foil(moebius, ("horizontal", 0.0))) == "one_sided"


def test_bundle_classification_shortcut():
    expect = {
        ("trivial", 1): ("Cylindrical", 0, 0),
        ("moebius", 1): ("TwistedCylindrical", 1, 0),
        ("plane2", 2): ("Planar", 0, 1),
        ("plane3", 3): ("Planar", 0, 1),
    }
    bundles = {
        ("trivial", 1): build_bundle(rank=1),
        ("moebius", 1): build_bundle(rank=1, mobius=True),
        ("plane2", 2): build_bundle(rank=2, omega=0.3),
        ("plane3", 3): build_bundle(rank=3, omega=0.3),
    }
    for key, (tag, n_sr, n_s) in expect.items():
        desc = classify(bundles[key])
        assert desc.type_tag == tag, key
        assert (desc.n_sr, desc.n_s) == (n_sr, n_s), key
        assert desc.diameter is None, key


def test_descriptor_json_is_table_shaped():
    desc = classify(get_preset("torus")())
    d = desc.to_json()
    assert d["type"] == "Toric"
    assert d["N_SR"] == 0 and d["N_S"] == 0
    assert abs(d["T"] - 1.3) <= 1e-3 and abs(d["D"] - 1.3) <= 1e-3
    open_d = classify(get_preset("cylinder")()).to_json()
    assert open_d["T"] == "inf" and open_d["D"] == "inf"


def test_nonstandard_torus_width_tracks_period():
    m = FlatQuotient.torus(y_period=3.4)
    desc = classify(m)
    assert desc.type_tag == "Toric"
    assert abs(desc.diameter - 1.7) <= 1e-6
