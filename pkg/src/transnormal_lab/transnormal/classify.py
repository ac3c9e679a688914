"""Classification of transnormal systems from a seed foil.

The classifier marches the normal-exponential front of the seed on each
of its sides and resolves what ends the march: a focal collapse, a
one-sided mirror foil, a periodic return, or a meeting of the two
fronts.  Candidate event times come from exact interval and deck-group
arithmetic; every candidate is then confirmed and refined numerically on
the marching clouds, so a wrong candidate cannot silently classify.

The identity

    (number of one-sided foils) + (number of focal foils) <= 2

holds in every run; together with the finiteness of the leaf-space
diameter it pins one of seven types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .. import config
from ..bundles import BundleTotalSpace
from ..errors import (
    AmbiguousMatch,
    HorizonExceeded,
    InputError,
    UnsupportedDescriptor,
)
from ..geometry.manifolds import EndCondition, FlatQuotient, WarpedProfile
from ..geometry.operators import gradient_fd
from .foils import DR, S, SR, Cloud, Foil, FoilWave, cloud_distance

TYPE_TABLE = {
    (0, 0, False): "Cylindrical",
    (0, 1, False): "Planar",
    (1, 0, False): "TwistedCylindrical",
    (0, 0, True): "Toric",
    (0, 2, True): "Spherical",
    (1, 1, True): "RealProjective",
    (2, 0, True): "KleinBottled",
}

_EVENT_FOIL_KIND = {"collapse": S, "mirror": SR}


@dataclass
class NoMatch:
    residual: float


@dataclass
class MirrorAt:
    t: float


@dataclass
class Period:
    period: float


@dataclass
class CrossMatch:
    t: float


@dataclass
class SystemDescriptor:
    """Classified transnormal system."""

    type_tag: str
    n_sr: int
    n_s: int
    injectivity_radius: float | None
    diameter: float | None
    foils: list = field(default_factory=list)
    horizon_limited: bool = False
    seed: dict = field(default_factory=dict)
    manifold_label: str = ""

    @property
    def n_c(self) -> int:
        return self.n_sr + self.n_s

    def to_json(self) -> dict:
        def num(x):
            return "inf" if x is None else float(x)

        return {
            "type": self.type_tag,
            "N_SR": self.n_sr,
            "N_S": self.n_s,
            "T": num(self.injectivity_radius),
            "D": num(self.diameter),
            "foils": self.foils,
            "horizon_limited": self.horizon_limited,
            "seed": self.seed,
            "manifold": self.manifold_label,
        }


def normal_bundle_connectivity(foil: Foil) -> str:
    """Connectivity of the unit normal bundle of a foil.

    ``"two_sided"`` for regular foils with trivial normal bundle,
    ``"one_sided"`` for mirror foils, ``"focal_sphere"`` for focal ones.
    """
    if foil.kind == S:
        return "focal_sphere"
    return "one_sided" if foil.kind == SR else "two_sided"


def default_seed(manifold, n_samples=96) -> Foil:
    """Deterministic seed foil for each manifold family."""
    if isinstance(manifold, FlatQuotient):
        if manifold.x_period is None and manifold.y_period is None:
            return Foil(manifold, ("point", (0.0, 0.0)), n_samples)
        if manifold.glide and manifold.y_period is None:
            return Foil(manifold, ("horizontal", 0.0), n_samples)
        if manifold.y_period is None:
            return Foil(manifold, ("horizontal", 0.0), n_samples)
        return Foil(manifold, ("horizontal", manifold.y_period / 6.0), n_samples)
    if isinstance(manifold, WarpedProfile):
        if manifold.left == EndCondition.COLLAPSE:
            return Foil(manifold, ("pole", "left"), n_samples)
        if manifold.right == EndCondition.COLLAPSE:
            return Foil(manifold, ("pole", "right"), n_samples)
        span = manifold.r_hi - manifold.r_lo
        return Foil(manifold, ("level", manifold.r_lo + 0.37 * span), n_samples)
    if isinstance(manifold, BundleTotalSpace):
        return Foil(manifold, ("zero_section",), n_samples)
    raise UnsupportedDescriptor(f"no default seed for {type(manifold).__name__}")


def _leaf_space_scale(manifold) -> float:
    if isinstance(manifold, FlatQuotient):
        if manifold.y_period is not None:
            return manifold.y_period
        return 2.0 * manifold._window
    if isinstance(manifold, WarpedProfile):
        span = manifold.r_hi - manifold.r_lo
        return span if np.isfinite(span) else 2.0 * abs(manifold.r_hi if np.isfinite(manifold.r_hi) else 1.0)
    return 2.0


def _wave_candidates(wave: FoilWave):
    """Exact candidate events for one marching side.

    Returns ``(events, certified_open)``; events are (t, kind) with kind
    in collapse / mirror / period / cross.  certified_open means the deck
    group proves nothing can ever happen on this side.
    """
    m = wave.manifold
    foil = wave.foil
    side = wave.side
    eps = 1e-12
    if isinstance(m, FlatQuotient):
        if foil.locus[0] == "point":
            return [], True
        events = []
        per = m.y_period
        if m.glide:
            fixed = [0.0, per / 2.0] if per is not None else [0.0]
            y, sgn = foil.strands[0]
            v = sgn * side
            for f0 in fixed:
                if per is not None:
                    t = (v * (f0 - y)) % per
                    if t > eps:
                        events.append((t, "mirror"))
                else:
                    t = v * (0.0 - y)
                    if t > eps:
                        events.append((t, "mirror"))
            if per is not None:
                events.append((per, "period"))
        else:
            if per is not None:
                events.append((per, "period"))
                if len(foil.sides()) == 2:
                    events.append((per / 2.0, "cross"))
        return sorted(events), not events
    if isinstance(m, WarpedProfile):
        if m.left == EndCondition.WRAP:
            per = m.r_hi - m.r_lo
            events = [(per, "period")]
            if len(foil.sides()) == 2:
                events.append((per / 2.0, "cross"))
            return sorted(events), False
        if foil.locus[0] == "pole":
            start = m.r_lo if foil.locus[1] == "left" else m.r_hi
            sgn = 1.0 if foil.locus[1] == "left" else -1.0
        else:
            start = float(foil.locus[1])
            sgn = side
        target_end = m.right if sgn > 0 else m.left
        gap = (m.r_hi - start) if sgn > 0 else (start - m.r_lo)
        if target_end == EndCondition.OPEN or not np.isfinite(gap):
            return [], True
        kind = "collapse" if target_end == EndCondition.COLLAPSE else "mirror"
        return [(gap, kind)], False
    raise UnsupportedDescriptor(f"cannot enumerate events on {type(m).__name__}")


def _refine_v(objective, t0, half_width, t_floor=1e-9):
    lo = max(t_floor, t0 - half_width)
    hi = t0 + half_width
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x), float(res.fun)


def detect_identification(manifold, wave_a, t1, wave_b, t2, tol=None, delta=None):
    """Decide how two coincident marching clouds are identified.

    Probes the front slightly before and after the meeting parameters:
    co-moving fronts indicate a periodic return, counter-moving fronts a
    mirror (same wave) or a closed leaf space (different waves).  If both
    patterns fit inside the tolerance nothing is guessed:
    :class:`AmbiguousMatch` is raised with both candidates.
    """
    ca = wave_a.cloud(t1)
    cb = wave_b.cloud(t2)
    ext = max(ca.extent(), cb.extent(), 1e-9)
    if tol is None:
        tol = config.DEFAULT_TOL.match_rel * ext
    base = cloud_distance(manifold, ca, cb)
    if base > tol:
        return NoMatch(base)
    if delta is None:
        delta = 0.05 * max(t1, t2, _leaf_space_scale(manifold) / 4.0)
    d_period = max(
        cloud_distance(manifold, wave_a.cloud(t1 + delta), wave_b.cloud(t2 + delta)),
        cloud_distance(manifold, wave_a.cloud(t1 - delta), wave_b.cloud(t2 - delta)),
    )
    d_mirror = max(
        cloud_distance(manifold, wave_a.cloud(t1 - delta), wave_b.cloud(t2 + delta)),
        cloud_distance(manifold, wave_a.cloud(t1 + delta), wave_b.cloud(t2 - delta)),
    )
    period_ok = d_period <= tol
    mirror_ok = d_mirror <= tol
    if period_ok and mirror_ok:
        raise AmbiguousMatch(
            [f"period {t2 - t1:.6g}", f"mirror at {(t1 + t2) / 2.0:.6g}"]
        )
    if mirror_ok:
        if wave_a is wave_b:
            return MirrorAt((t1 + t2) / 2.0)
        return CrossMatch((t1 + t2) / 2.0)
    if period_ok:
        return Period(abs(t2 - t1))
    return NoMatch(max(d_period, d_mirror))


def _confirm_event(wave, other_wave, t0, kind, scale, tol):
    """Numerically refine and verify one predicted event.

    Returns the refined time.  Raises InputError when the clouds do not
    actually behave as predicted (wrong candidate, wrong arithmetic).
    """
    m = wave.manifold
    half = min(0.45 * t0, 0.1 * scale) if t0 > 0 else 0.1 * scale
    if kind == "collapse":
        t_ref, val = _refine_v(lambda t: wave.cloud(t).extent(), t0, half)
        if val > tol:
            raise InputError(
                f"predicted focal collapse at t={t0:.6g} not confirmed "
                f"(residual {val:.3e})"
            )
        return t_ref
    if kind == "mirror":
        if len(wave.foil.strands) == 2:
            t_ref, val = _refine_v(wave.strand_merge_residual, t0, half)
            if val > tol:
                raise InputError(
                    f"predicted mirror foil at t={t0:.6g} not confirmed "
                    f"(residual {val:.3e})"
                )
        else:
            t_ref = t0
        # reflection property across the mirror
        delta = 0.31 * half
        refl = cloud_distance(m, wave.cloud(t_ref + delta), wave.cloud(t_ref - delta))
        if refl > tol:
            raise InputError(
                f"front does not reflect across t={t_ref:.6g} "
                f"(residual {refl:.3e})"
            )
        result = detect_identification(m, wave, t_ref - delta, wave, t_ref + delta)
        if not isinstance(result, MirrorAt):
            raise InputError(f"mirror probe at t={t_ref:.6g} returned {result}")
        return t_ref
    if kind == "cross":
        t_ref, val = _refine_v(
            lambda t: cloud_distance(m, wave.cloud(t), other_wave.cloud(t)), t0, half
        )
        if val > tol:
            raise InputError(
                f"fronts do not meet at t={t0:.6g} (residual {val:.3e})"
            )
        result = detect_identification(m, wave, t_ref, other_wave, t_ref)
        if not isinstance(result, CrossMatch):
            raise InputError(f"cross probe at t={t_ref:.6g} returned {result}")
        return t_ref
    if kind == "period":
        c0 = wave.cloud(0.0)
        t_ref, val = _refine_v(
            lambda t: cloud_distance(m, wave.cloud(t), c0), t0, half
        )
        if val > tol:
            raise InputError(
                f"front does not return at t={t0:.6g} (residual {val:.3e})"
            )
        return t_ref
    raise InputError(f"unknown event kind {kind!r}")


def _classify_bundle(manifold: BundleTotalSpace, seed: Foil, n_probe=64):
    from ..bundles import squared_norm_function

    f = squared_norm_function(manifold)
    # numeric probe: the squared-distance function must be transnormal
    rng_t = np.linspace(0.0, 1.0, n_probe, endpoint=False)
    if manifold.has_base_coordinate:
        L = manifold.spec.base_length if manifold.spec.base == "circle" else 2.0
        pts = np.column_stack(
            [rng_t * L]
            + [0.3 + 0.9 * ((rng_t * np.sqrt(p)) % 1.0) for p in range(2, 2 + manifold.rank)]
        )
    else:
        pts = np.column_stack(
            [0.3 + 0.9 * ((rng_t * np.sqrt(p)) % 1.0) for p in range(2, 2 + manifold.rank)]
        )
    _, n2 = gradient_fd(manifold, f, pts)
    resid = float(np.max(np.abs(n2 - 4.0 * f(pts))))
    if resid > 1e-5:
        raise InputError(
            f"bundle metric failed the transnormality probe (residual {resid:.3e})"
        )
    k = manifold.rank
    twisted = manifold.spec.twisted
    if k >= 2:
        n_sr, n_s = 0, 1
    elif twisted:
        n_sr, n_s = 1, 0
    else:
        n_sr, n_s = 0, 0
    foils = [{"t": 0.0, "kind": seed.kind}]
    return SystemDescriptor(
        TYPE_TABLE[(n_sr, n_s, False)],
        n_sr,
        n_s,
        None,
        None,
        foils,
        False,
        seed.describe(),
        manifold.spec.label or f"rank-{k} bundle",
    )


def classify(
    manifold,
    seed: Foil | None = None,
    t_max: float | None = None,
    n_samples: int = 96,
    match_rel: float = config.DEFAULT_TOL.match_rel,
) -> SystemDescriptor:
    """Classify the transnormal system generated by a seed foil.

    Raises :class:`HorizonExceeded` (carrying a partial descriptor) when
    ``t_max`` cuts the march before all sides resolve and the deck group
    cannot certify the side as open.
    """
    if seed is None:
        seed = default_seed(manifold, n_samples)
    if isinstance(manifold, BundleTotalSpace):
        return _classify_bundle(manifold, seed)

    scale = _leaf_space_scale(manifold)
    if t_max is None:
        t_max = 4.0 * scale
    label = getattr(manifold, "label", "") or type(manifold).__name__

    outcomes = {}
    waves = {}
    sides = seed.sides()
    for side in sides:
        waves[side] = seed.wave(side)
    cross_done = None
    for side in sides:
        if cross_done is not None:
            outcomes[side] = ("cross", cross_done)
            continue
        wave = waves[side]
        events, certified_open = _wave_candidates(wave)
        if certified_open:
            outcomes[side] = ("open", None)
            continue
        events = [e for e in events if e[0] <= t_max]
        if not events:
            partial = _assemble(
                manifold, seed, {**outcomes, side: ("horizon", t_max)},
                label, horizon_limited=True,
            )
            raise HorizonExceeded(t_max, partial)
        t0, kind = events[0]
        probe = wave.cloud(max(t0 * 0.5, 1e-3 * scale))
        tol = max(match_rel * max(probe.extent(), 1e-9), 1e-10)
        other = waves.get(-side)
        if kind == "cross" and other is None:
            other = seed.wave(-side)
            waves[-side] = other
        t_ref = _confirm_event(wave, other, t0, kind, scale, tol)
        outcomes[side] = (kind, t_ref)
        if kind == "cross":
            cross_done = t_ref
    return _assemble(manifold, seed, outcomes, label, horizon_limited=False)


def _assemble(manifold, seed, outcomes, label, horizon_limited):
    n_sr = 1 if seed.kind == SR else 0
    n_s = 1 if seed.kind == S else 0
    foils = [{"t": 0.0, "kind": seed.kind}]
    finite = True
    total = 0.0
    t_cross = None
    period = None
    for side, (kind, t) in sorted(outcomes.items(), reverse=True):
        if kind in ("open", "horizon"):
            finite = False
            continue
        if kind == "cross":
            t_cross = t
            continue
        if kind == "period":
            period = t
            continue
        foils.append({"t": side * t, "kind": _EVENT_FOIL_KIND[kind]})
        if kind == "mirror":
            n_sr += 1
        else:
            n_s += 1
        total += t
    if t_cross is not None:
        diameter = t_cross
    elif period is not None:
        diameter = period / 2.0
    elif finite:
        diameter = total
    else:
        diameter = None
    inj = diameter
    key = (n_sr, n_s, diameter is not None)
    if key not in TYPE_TABLE:
        raise InputError(
            f"measured foil counts {key} violate the classification bound"
        )
    return SystemDescriptor(
        TYPE_TABLE[key] if not horizon_limited else "Unresolved",
        n_sr,
        n_s,
        inj,
        diameter,
        foils,
        horizon_limited,
        seed.describe(),
        label,
    )


def foil_census(manifold, descriptor: SystemDescriptor, t_values, seed: Foil | None = None):
    """Label leaf-space parameters against the classified special foils."""
    if seed is None:
        seed = default_seed(manifold)
    out = []
    special = {
        round(f["t"], 9): f["kind"] for f in descriptor.foils
    }
    period = None
    if descriptor.type_tag == "Toric" and descriptor.diameter:
        period = 2.0 * descriptor.diameter
    for t in t_values:
        tt = float(t)
        if period is not None:
            tt_mod = tt % period
        else:
            tt_mod = tt
        kind = DR
        for ts, k in special.items():
            if abs(tt_mod - ts) <= 1e-6 or (
                period is not None and abs(tt_mod - period - ts) <= 1e-6
            ):
                kind = k
                break
        out.append({"t": tt, "kind": kind})
    return out
