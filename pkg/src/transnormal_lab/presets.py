"""Named constructions used by the CLI and the test suite.

Every preset is deterministic.  Perturbed variants replace a flat or
closed-form metric with a sampled warped profile whose warp carries a
small seeded smooth bump; the classification outcome must not move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bundles import BundleSpec, rotation_generator, total_space_metric
from .errors import InputError
from .geometry.manifolds import EndCondition, FlatQuotient, WarpedProfile

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Preset:
    name: str
    family: str
    summary: str
    build: object

    def __call__(self):
        return self.build()


def _classification_presets():
    return {
        "plane": Preset(
            "plane", "flat", "euclidean plane, distance circles about the origin",
            FlatQuotient.plane,
        ),
        "cylinder": Preset(
            "cylinder", "flat", "flat cylinder foliated by horizontal circles",
            FlatQuotient.cylinder,
        ),
        "torus": Preset(
            "torus", "flat", "flat 2-torus with a closed leaf circle",
            FlatQuotient.torus,
        ),
        "moebius": Preset(
            "moebius", "flat", "flat Moebius band about its core circle",
            FlatQuotient.moebius,
        ),
        "klein": Preset(
            "klein", "flat", "flat Klein bottle with two one-sided circles",
            FlatQuotient.klein,
        ),
        "sphere": Preset(
            "sphere", "warped", "round sphere foliated by latitude circles",
            WarpedProfile.sphere,
        ),
        "projective-plane": Preset(
            "projective-plane", "warped",
            "round projective plane: pole circles up to a one-sided equator",
            WarpedProfile.projective_plane,
        ),
    }


CLASSIFICATION_PRESETS = _classification_presets()


def build_bundle(rank=2, omega=0.7, mobius=False, base_length=_TWO_PI,
                 u_window=2.0):
    """Euclidean vector bundle over a circle with a unimodular metric.

    ``omega`` scales the constant rotational connection form (rank >= 2);
    ``mobius`` flips the rank-1 transition.
    """
    if rank == 1:
        spec = BundleSpec(
            rank=1,
            base="circle",
            base_length=base_length,
            transition=(-np.eye(1) if mobius else None),
            label="moebius line bundle" if mobius else "trivial line bundle",
        )
    else:
        if mobius:
            raise InputError("orientation flips are a rank-1 construction here")
        spec = BundleSpec(
            rank=rank,
            base="circle",
            base_length=base_length,
            a0=omega * rotation_generator(rank),
            label=f"rank-{rank} bundle, connection strength {omega:g}",
        )
    return total_space_metric(spec, u_window=u_window)


BUNDLE_PRESETS = {
    "bundle-trivial": Preset(
        "bundle-trivial", "bundle", "trivial line bundle over the circle",
        lambda: build_bundle(rank=1),
    ),
    "bundle-moebius": Preset(
        "bundle-moebius", "bundle", "Moebius line bundle over the circle",
        lambda: build_bundle(rank=1, mobius=True),
    ),
    "bundle-k2": Preset(
        "bundle-k2", "bundle", "rank-2 bundle with a rotating connection",
        lambda: build_bundle(rank=2, omega=0.7),
    ),
    "bundle-k3": Preset(
        "bundle-k3", "bundle", "rank-3 bundle with a rotating connection",
        lambda: build_bundle(rank=3, omega=0.4),
    ),
}

# double-disk assemblies: two disk bundles glued along their common
# sphere bundle boundary, keyed by the two fiber dimensions
SURGERY_PRESETS = {
    "torus-two-cylinders": {
        "k1": 1, "k2": 1, "fiber_len": _TWO_PI, "sigma": 0.0,
        "label": "two cylinders glued into a torus",
    },
    "klein-two-moebius": {
        "k1": 1, "k2": 1, "fiber_len": _TWO_PI, "sigma": math.pi,
        "label": "two Moebius bands glued into a Klein bottle",
    },
    "sphere-two-disks": {
        "k1": 2, "k2": 2, "fiber_len": _TWO_PI, "sigma": 0.0,
        "label": "two disks glued into a sphere",
    },
}


_END_BY_NAME = {
    "collapse": EndCondition.COLLAPSE,
    "mirror": EndCondition.MIRROR,
    "wrap": EndCondition.WRAP,
    "open": EndCondition.OPEN,
}


def _density_from_harmonics(harmonics):
    terms = [(int(n), float(a), float(p)) for n, a, p in harmonics]

    def rho(th):
        th = np.asarray(th, dtype=np.float64)
        out = np.ones_like(th)
        for n, a, p in terms:
            out = out + a * np.cos(n * th + p)
        return out

    return rho


def load_spec(path):
    """Read a manifold or assembly description from a JSON file.

    ``family`` selects the construction: "flat" (periods, glide flag),
    "warped" (sampled profile plus end conditions), "bundle" (rank and
    connection strength), or "surgery" (double-disk parameters, fiber
    densities given as cosine harmonics [n, amplitude, phase]).  The
    surgery family returns a parameter dict for ``surgery.run_preset``;
    the others return the manifold itself.
    """
    import json

    with open(path) as fh:
        doc = json.load(fh)
    family = doc.get("family")
    if family == "flat":
        return FlatQuotient(
            x_period=doc.get("x_period"),
            y_period=doc.get("y_period"),
            glide=bool(doc.get("glide", False)),
            window=float(doc.get("window", 3.0)),
            label=doc.get("label", "flat"),
        )
    if family == "warped":
        try:
            left = _END_BY_NAME[doc.get("left", "open")]
            right = _END_BY_NAME[doc.get("right", "open")]
        except KeyError as e:
            raise InputError(f"unknown end condition {e.args[0]!r}") from None
        return WarpedProfile.from_profile(
            np.asarray(doc["grid"], dtype=np.float64),
            np.asarray(doc["values"], dtype=np.float64),
            float(doc.get("fiber_len", _TWO_PI)),
            left,
            right,
            sigma_left=float(doc.get("sigma_left", 0.0)),
            sigma_right=float(doc.get("sigma_right", 0.0)),
            label=doc.get("label", "warped"),
        )
    if family == "bundle":
        return build_bundle(
            rank=int(doc.get("rank", 2)),
            omega=float(doc.get("omega", 0.0)),
            mobius=bool(doc.get("mobius", False)),
            base_length=float(doc.get("base_length", _TWO_PI)),
        )
    if family == "surgery":
        params = {
            "k1": int(doc["k1"]),
            "k2": int(doc["k2"]),
            "fiber_len": float(doc.get("fiber_len", _TWO_PI)),
            "sigma": float(doc.get("sigma", 0.0)),
            "label": doc.get("label", "user assembly"),
        }
        for key in ("rho1", "rho2"):
            if key in doc:
                params[key] = _density_from_harmonics(doc[key])
        return params
    raise InputError(
        f"spec family must be flat, warped, bundle or surgery, got {family!r}"
    )


def radial_wave(window=7.5):
    """Plane with f = cos r: transnormal everywhere, isoparametric nowhere.

    The profile is the trigonometric one with T = pi, but the level near
    f = 1 recurs at radii 0, 2 pi, 4 pi, ... whose circles have different
    mean curvature, so no Laplacian law a(f) can hold.  The window must
    reach past 2 pi so a level bin actually mixes the two radii.
    """
    from .transnormal.functions import BProfile, TransnormalFunction

    manifold = FlatQuotient.plane(window=window)

    def ev(pts):
        return np.cos(np.hypot(pts[:, 0], pts[:, 1]))

    fn = TransnormalFunction(
        "B", BProfile(1.0, 0.0, -1.0, -1.0, 1.0), None, ev, "radial wave"
    )
    return manifold, fn


def all_presets():
    out = {}
    out.update(CLASSIFICATION_PRESETS)
    out.update(BUNDLE_PRESETS)
    return out


def get_preset(name: str):
    table = all_presets()
    if name not in table:
        known = ", ".join(sorted(table) + sorted(SURGERY_PRESETS))
        raise InputError(f"unknown preset {name!r}; known presets: {known}")
    return table[name]


def _bump(rs, span, strength, seed, modes=3, kind="cos"):
    """Seeded smooth perturbation profile on [0, span].

    ``cos`` bumps have zero slope at both ends (mirror/open safe),
    ``sin2`` bumps vanish to second order at both ends (collapse safe),
    ``fourier`` bumps are periodic.
    """
    rng = np.random.default_rng(seed)
    amps = strength * rng.uniform(-1.0, 1.0, modes)
    out = np.zeros_like(rs)
    x = rs / span
    for j, a in enumerate(amps, start=1):
        if kind == "cos":
            out += a * np.cos(j * math.pi * x)
        elif kind == "sin2":
            out += a * np.sin(j * math.pi * x) ** 2
        else:
            ph = rng.uniform(0.0, _TWO_PI)
            out += a * np.cos(_TWO_PI * j * x + ph)
    return out


def perturbed_variant(name: str, strength=0.02, seed=0, n_grid=97):
    """Warped-profile version of a classification preset with a seeded
    smooth metric perturbation of the given relative strength."""
    if name == "plane":
        span = 3.0
        rs = np.linspace(0.0, span, n_grid)
        w = rs * (1.0 + _bump(rs, span, strength, seed, kind="sin2"))
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.COLLAPSE, EndCondition.OPEN,
            label="plane (perturbed polar)",
        )
    if name == "cylinder":
        span = 4.0
        rs = np.linspace(-span / 2.0, span / 2.0, n_grid)
        w = 1.0 + _bump(rs - rs[0], span, strength, seed, kind="cos")
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.OPEN, EndCondition.OPEN,
            label="cylinder (perturbed)",
        )
    if name == "torus":
        span = 2.6
        rs = np.linspace(0.0, span, n_grid)
        w = 1.0 + _bump(rs, span, strength, seed, kind="fourier")
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.WRAP, EndCondition.WRAP,
            label="torus (perturbed)",
        )
    if name == "moebius":
        span = 2.5
        rs = np.linspace(0.0, span, n_grid)
        w = 1.0 + _bump(rs, span, strength, seed, kind="cos")
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.MIRROR, EndCondition.OPEN,
            sigma_left=math.pi, label="moebius (perturbed)",
        )
    if name == "klein":
        span = 1.3
        rs = np.linspace(0.0, span, n_grid)
        w = 1.0 + _bump(rs, span, strength, seed, kind="cos")
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.MIRROR, EndCondition.MIRROR,
            sigma_left=math.pi, sigma_right=math.pi,
            label="klein (perturbed)",
        )
    if name == "sphere":
        span = math.pi
        rs = np.linspace(0.0, span, n_grid)
        w = np.sin(rs) * (1.0 + _bump(rs, span, strength, seed, kind="sin2"))
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.COLLAPSE, EndCondition.COLLAPSE,
            label="sphere (perturbed)",
        )
    if name == "projective-plane":
        span = math.pi / 2.0
        rs = np.linspace(0.0, span, n_grid)
        w = np.sin(rs) * (1.0 + _bump(rs, span, strength, seed, kind="sin2"))
        return WarpedProfile.from_profile(
            rs, w, _TWO_PI, EndCondition.COLLAPSE, EndCondition.MIRROR,
            sigma_right=math.pi, label="projective-plane (perturbed)",
        )
    raise InputError(f"no perturbed variant for preset {name!r}")


def seed_grid(manifold, count=3):
    """Alternative seed foils for cross-checking a classification."""
    from .transnormal import Foil, default_seed

    seeds = [default_seed(manifold)]
    if isinstance(manifold, FlatQuotient) and manifold.y_period is not None:
        per = manifold.y_period
        for frac in np.linspace(0.13, 0.41, count - 1):
            seeds.append(Foil(manifold, ("horizontal", frac * per)))
    elif isinstance(manifold, WarpedProfile):
        lo, hi = manifold.r_lo, manifold.r_hi
        if np.isfinite(lo) and np.isfinite(hi):
            span = hi - lo
            wrap = manifold.left == EndCondition.WRAP
            for frac in np.linspace(0.23, 0.61, count - 1):
                r = lo + frac * span
                at_end = (manifold.left, manifold.right)
                if not wrap and EndCondition.COLLAPSE in at_end:
                    # stay off the poles so the level is regular
                    r = min(max(r, lo + 0.1 * span), hi - 0.1 * span)
                seeds.append(Foil(manifold, ("level", r)))
    return seeds[:count]
