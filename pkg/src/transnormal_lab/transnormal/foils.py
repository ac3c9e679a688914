"""Foils (leaves of a transnormal system) and their marching fronts.

A foil is described by its locus on one of the supported manifolds.  The
classifier never manipulates leaves symbolically; it samples each foil
into an ordered point cloud, pushes the cloud along unit normals with
the closed-form normal exponential, and compares clouds by a
quotient-aware symmetric Hausdorff distance over polyline segments.

Locus kinds
-----------
``("horizontal", y0)``        flat quotient leaf through height y0
``("point", (x, y))``         single point on a flat quotient
``("level", r0)``             warped profile circle {r = r0}
``("pole", "left"|"right")``  collapsed profile end
``("zero_section",)``         zero section of a disk bundle
``("sphere", r)``             radius-r sphere bundle
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import backend
from ..bundles import BundleTotalSpace, _fibonacci_directions
from ..errors import InputError, UnsupportedDescriptor
from ..geometry.manifolds import EndCondition, FlatQuotient, WarpedProfile
from ..geometry.operators import normal_exponential

DR = "DR"
SR = "SR"
S = "S"


@dataclass
class Cloud:
    """Ordered sample of a foil pushed to a common normal distance.

    ``segments`` are short locally-unwrapped polyline pieces whose union
    covers the foil; matching measures point-to-segment distances so the
    sampling phase of two clouds never matters.
    """

    points: np.ndarray
    segments: np.ndarray
    strand_slices: list
    scale: np.ndarray

    def extent(self) -> float:
        """Half the total polyline length, i.e. the leaf 'radius'."""
        if len(self.segments) == 0:
            return 0.0
        diffs = (self.segments[:, 1] - self.segments[:, 0]) * self.scale
        return 0.5 * float(np.linalg.norm(diffs, axis=1).sum())


def cloud_distance(manifold, a: Cloud, b: Cloud) -> float:
    """Symmetric quotient Hausdorff distance between two clouds."""
    k = backend.get_kernels()
    scale = a.scale
    d = a.points.shape[1]

    def seg_stack(c: Cloud):
        if len(c.segments) == 0:
            # degenerate cloud: points double as zero-length segments
            return np.repeat(c.points[:, None, :], 2, axis=1)
        return c.segments

    out = 0.0
    for pts, other in ((a.points, b), (b.points, a)):
        segs = seg_stack(other)
        flat = segs.reshape(-1, d)
        stacked = np.concatenate(
            [img(flat).reshape(-1, 2, d) for img in manifold.image_transforms()]
        )
        val = k.hausdorff_directed(
            np.ascontiguousarray(pts * scale),
            np.ascontiguousarray(stacked * scale[None, None]),
        )
        out = max(out, val)
    return out


@dataclass
class Foil:
    """A leaf of the system, given by manifold + locus.

    ``kind`` is DR (two-sided regular), SR (one-sided regular) or S
    (focal).  It is derived from the locus on construction.
    """

    manifold: object
    locus: tuple
    n_samples: int = 96
    kind: str = field(init=False)
    strands: list = field(init=False, default_factory=list)

    def __post_init__(self):
        m = self.manifold
        tag = self.locus[0]
        if tag == "horizontal":
            if not isinstance(m, FlatQuotient):
                raise InputError("horizontal foils live on flat quotients")
            y0 = float(self.locus[1])
            if m.glide:
                per = m.y_period
                y_can = y0 % per if per else y0
                partner = (-y_can) % per if per else -y_can
                if math.isclose(y_can, partner, abs_tol=1e-12) or (
                    per and math.isclose(abs(y_can - partner), 0.0, abs_tol=1e-12)
                ):
                    self.kind = SR
                    self.strands = [(y_can, +1.0)]
                else:
                    self.kind = DR
                    self.strands = [(y_can, +1.0), (partner, -1.0)]
            else:
                self.kind = DR
                self.strands = [(y0 % m.y_period if m.y_period else y0, +1.0)]
        elif tag == "point":
            self.kind = S
        elif tag == "level":
            if not isinstance(m, WarpedProfile):
                raise InputError("level foils live on warped profiles")
            r0 = float(self.locus[1])
            at_left = math.isclose(r0, m.r_lo, abs_tol=1e-12)
            at_right = math.isclose(r0, m.r_hi, abs_tol=1e-12)
            if at_left or at_right:
                end = m.left if at_left else m.right
                if end == EndCondition.MIRROR:
                    self.kind = SR
                elif end == EndCondition.COLLAPSE:
                    raise InputError("use a pole locus for collapsed ends")
                else:
                    self.kind = DR
            else:
                self.kind = DR
        elif tag == "pole":
            if not isinstance(m, WarpedProfile):
                raise InputError("pole foils live on warped profiles")
            end = m.left if self.locus[1] == "left" else m.right
            if end != EndCondition.COLLAPSE:
                raise InputError("pole locus requires a collapse end")
            self.kind = S
        elif tag == "zero_section":
            if not isinstance(m, BundleTotalSpace):
                raise InputError("zero sections live on bundle total spaces")
            if m.rank >= 2:
                self.kind = S
            else:
                self.kind = SR if m.spec.twisted else DR
        elif tag == "sphere":
            if not isinstance(m, BundleTotalSpace):
                raise InputError("sphere foils live on bundle total spaces")
            self.kind = DR if not (m.rank == 1 and m.spec.twisted) else DR
        else:
            raise UnsupportedDescriptor(f"unknown foil locus {tag!r}")

    def sides(self):
        """Marching sides: two for DR foils, one otherwise."""
        return (+1.0, -1.0) if self.kind == DR and self.locus[0] != "zero_section" else (+1.0,)

    def wave(self, side: float) -> "FoilWave":
        return FoilWave(self, side)

    def describe(self) -> dict:
        return {"locus": [self.locus[0]] + [
            list(v) if isinstance(v, (tuple, list, np.ndarray)) else v
            for v in self.locus[1:]
        ], "kind": self.kind}


class FoilWave:
    """One-sided normal-exponential front of a foil."""

    def __init__(self, foil: Foil, side: float):
        self.foil = foil
        self.side = float(side)
        self.manifold = foil.manifold
        self._build_seed()

    def _build_seed(self):
        m = self.manifold
        n = self.foil.n_samples
        tag = self.foil.locus[0]
        if tag == "horizontal":
            span = m.x_period if m.x_period is not None else 2.0 * m._window
            x0 = 0.0 if m.x_period is not None else -m._window
            xs = x0 + span * np.arange(n) / n
            pts = []
            nor = []
            slices = []
            steps = []
            for y, sgn in self.foil.strands:
                start = len(pts) * 1
                pts.extend([[x, y] for x in xs])
                nor.extend([[0.0, sgn * self.side] for _ in xs])
                slices.append(slice(start, start + n))
                steps.append(np.array([span / n, 0.0]))
            self._seed = np.asarray(pts)
            self._normals = np.asarray(nor)
            self._slices = slices
            self._steps = steps
            self._scale = np.ones(2)
        elif tag == "point":
            center = np.asarray(self.foil.locus[1], dtype=np.float64)
            phis = 2.0 * np.pi * np.arange(n) / n
            self._seed = np.tile(center, (n, 1))
            self._normals = np.column_stack([np.cos(phis), np.sin(phis)])
            self._slices = [slice(0, n)]
            self._steps = None  # circle segments built per t
            self._scale = np.ones(2)
        elif tag == "level":
            r0 = float(self.foil.locus[1])
            ths = m.fiber_len * np.arange(n) / n
            self._seed = np.column_stack([np.full(n, r0), ths])
            self._normals = np.column_stack([np.full(n, self.side), np.zeros(n)])
            self._slices = [slice(0, n)]
            self._steps = [np.array([0.0, m.fiber_len / n])]
            self._scale = None  # r-dependent, set per cloud
        elif tag == "pole":
            left = self.foil.locus[1] == "left"
            r0 = m.r_lo if left else m.r_hi
            ths = m.fiber_len * np.arange(n) / n
            self._seed = np.column_stack([np.full(n, r0), ths])
            sgn = 1.0 if left else -1.0
            self._normals = np.column_stack([np.full(n, sgn), np.zeros(n)])
            self._slices = [slice(0, n)]
            self._steps = [np.array([0.0, m.fiber_len / n])]
            self._scale = None
        elif tag == "zero_section":
            if m.has_base_coordinate:
                L = m.spec.base_length if m.spec.base == "circle" else 2.0
                off = 0.0 if m.spec.base == "circle" else -1.0
                ths = off + L * np.arange(n) / n
                dirs = _fibonacci_directions(m.rank, n)
                self._seed = np.column_stack([ths, np.zeros((n, m.rank))])
                self._normals = np.column_stack([np.zeros(n), dirs])
                self._steps = [np.array([L / n] + [0.0] * m.rank)]
            else:
                dirs = _fibonacci_directions(m.rank, n)
                self._seed = np.zeros((n, m.rank))
                self._normals = dirs
                self._steps = None
            self._slices = [slice(0, n)]
            self._scale = np.ones(m.dim)
        elif tag == "sphere":
            r0 = float(self.foil.locus[1])
            if not m.has_base_coordinate or m.rank != 1:
                raise UnsupportedDescriptor(
                    "sphere foil marching is supported for rank-1 circle bundles"
                )
            L = m.spec.base_length
            ths = L * np.arange(n) / n
            self._seed = np.column_stack([ths, np.full(n, r0)])
            self._normals = np.column_stack([np.zeros(n), np.full(n, self.side)])
            self._slices = [slice(0, n)]
            self._steps = [np.array([L / n, 0.0])]
            self._scale = np.ones(2)
        else:
            raise UnsupportedDescriptor(f"unknown foil locus {tag!r}")

    def cloud(self, t: float) -> Cloud:
        m = self.manifold
        raw, _ = normal_exponential(
            m, self._seed, self._normals, float(t), past_collapse="continue"
        )
        pts = m.canonicalize(raw)
        if self._scale is None:
            w = m.warp(pts[:1])[0] if hasattr(m, "warp") else 1.0
            scale = np.array([1.0, max(float(w), 1e-12)])
        else:
            scale = self._scale
        if self.foil.locus[0] == "point":
            # growing circle: chord segments between consecutive directions
            segs = np.stack([pts, np.roll(pts, -1, axis=0)], axis=1)
            segs[-1, 1] = pts[0]
        else:
            segs = np.empty((len(pts), 2, pts.shape[1]))
            start = 0
            for sl, step in zip(self._slices, self._steps):
                block = pts[sl]
                segs[sl, 0] = block
                segs[sl, 1] = block + step
                start += sl.stop - sl.start
        return Cloud(pts, segs, list(self._slices), scale)

    def strand_merge_residual(self, t: float) -> float:
        """Scaled distance between the two strand subclouds; zero exactly
        at a one-sided (mirror) foil.  Only meaningful for two-strand
        flat leaves."""
        c = self.cloud(t)
        if len(c.strand_slices) != 2:
            return float("inf")
        a = Cloud(
            c.points[c.strand_slices[0]],
            c.segments[c.strand_slices[0]],
            [slice(0, self.foil.n_samples)],
            c.scale,
        )
        b = Cloud(
            c.points[c.strand_slices[1]],
            c.segments[c.strand_slices[1]],
            [slice(0, self.foil.n_samples)],
            c.scale,
        )
        return cloud_distance(self.manifold, a, b)
