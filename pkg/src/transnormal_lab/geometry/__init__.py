"""Geometry core: manifold charts and finite-difference operators."""

from .manifolds import (
    EndCondition,
    FlatQuotient,
    GeodesicPath,
    Manifold,
    PointOnManifold,
    WarpedProfile,
    as_coords,
)
from .operators import (
    gradient_fd,
    integrate_geodesic,
    integrate_geodesic_batch,
    laplace_beltrami_fd,
    mean_curvature_level,
    metric_at,
    normal_exponential,
    tube_volume_density,
)

__all__ = [
    "EndCondition",
    "FlatQuotient",
    "GeodesicPath",
    "Manifold",
    "PointOnManifold",
    "WarpedProfile",
    "as_coords",
    "gradient_fd",
    "integrate_geodesic",
    "integrate_geodesic_batch",
    "laplace_beltrami_fd",
    "mean_curvature_level",
    "metric_at",
    "normal_exponential",
    "tube_volume_density",
]
