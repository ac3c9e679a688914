"""Foil marching, system classification, and normal-form functions."""

from .classify import (
    CrossMatch,
    MirrorAt,
    NoMatch,
    Period,
    SystemDescriptor,
    TYPE_TABLE,
    classify,
    default_seed,
    detect_identification,
    foil_census,
    normal_bundle_connectivity,
)
from .foils import DR, S, SR, Cloud, Foil, FoilWave, cloud_distance
from .functions import (
    BProfile,
    CASE_BY_TYPE,
    TransnormalFunction,
    build_transnormal_function,
)

__all__ = [
    "Cloud",
    "Foil",
    "FoilWave",
    "cloud_distance",
    "DR",
    "SR",
    "S",
    "classify",
    "default_seed",
    "detect_identification",
    "foil_census",
    "normal_bundle_connectivity",
    "SystemDescriptor",
    "NoMatch",
    "MirrorAt",
    "Period",
    "CrossMatch",
    "TYPE_TABLE",
    "BProfile",
    "TransnormalFunction",
    "build_transnormal_function",
    "CASE_BY_TYPE",
]
