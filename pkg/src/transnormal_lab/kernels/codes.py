"""Flat encodings of metric families consumed by both kernel backends.

A manifold chart is described by two small arrays, one integer and one
float, so the compiled and the vectorised kernels can share a single data
format without touching Python objects.

Integer slots::

    ints[0]  family        0 flat, 1 warped product, 2 bundle total space
    ints[1]  dim

    warped products (coords (r, theta)):
    ints[2]  radial factor kind   0 const, 1 linear, 2 sine, 3 spline
    ints[3]  angular factor kind  0 const, 3 spline
    ints[4]  left end    0 open, 1 collapse, 2 mirror, 3 wrap
    ints[5]  right end
    ints[6]  radial spline knot count (0 unless spline)
    ints[7]  angular spline knot count

    bundle total spaces (coords (theta, u_1..u_k) or (u_1..u_k)):
    ints[2]  fiber rank k
    ints[3]  base kind   0 point, 1 line, 2 circle

Float slots for warped products::

    floats[0:2]   r_lo, r_hi            (+-inf for open ends)
    floats[2]     fiber length
    floats[3:5]   mirror shifts applied to theta at left / right folds
    floats[8:12]  radial params  (amp, freq, phase, offset)
    floats[12:16] angular params (amp, -, -, -)
    floats[16:]   spline blocks, radial then angular:
                  [x0, dx, c_3 row, c_2 row, c_1 row, c_0 row] where the
                  rows hold (n-1) cubic coefficients, highest degree first.

Float slots for bundles::

    floats[0]     base circle length (0 for line or point base)
    floats[1:]    connection blocks A0, A1, B1, each k*k row major;
                  A(theta) = A0 + A1 cos(2 pi theta / L) + B1 sin(...)

Closed radial factors: const ``amp``, linear ``amp * (r - offset)``, sine
``amp * sin(freq * r + phase)``.  The fiber coefficient of the warped
metric is the square of the product of the two factors, so the sign of a
factor never matters to the kernels.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

FAMILY_FLAT = 0
FAMILY_WARPED = 1
FAMILY_BUNDLE = 2

WARP_CONST = 0
WARP_LINEAR = 1
WARP_SIN = 2
WARP_SPLINE = 3

END_OPEN = 0
END_COLLAPSE = 1
END_MIRROR = 2
END_WRAP = 3

BASE_POINT = 0
BASE_LINE = 1
BASE_CIRCLE = 2

EVENT_NONE = 0
EVENT_LEFT_FOLD = 1
EVENT_RIGHT_FOLD = 2
EVENT_WRAP = 3

_WARPED_HEADER = 16


class MetricCode(NamedTuple):
    ints: np.ndarray
    floats: np.ndarray


def spline_block(x0: float, dx: float, coeffs: np.ndarray) -> np.ndarray:
    """Flatten scipy-style cubic coefficients (4, n-1) into a kernel block."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[0] != 4:
        raise ValueError("coefficient array must have shape (4, n-1)")
    return np.concatenate([[float(x0), float(dx)], coeffs.reshape(-1)])


def pack_flat(dim: int) -> MetricCode:
    ints = np.array([FAMILY_FLAT, dim] + [0] * 6, dtype=np.int64)
    return MetricCode(ints, np.zeros(1, dtype=np.float64))


def pack_warped(
    r_lo: float,
    r_hi: float,
    fiber_len: float,
    left_end: int,
    right_end: int,
    rkind: int,
    rparams=(1.0, 0.0, 0.0, 0.0),
    skind: int = WARP_CONST,
    sparams=(1.0, 0.0, 0.0, 0.0),
    sig_left: float = 0.0,
    sig_right: float = 0.0,
    r_spline: np.ndarray | None = None,
    s_spline: np.ndarray | None = None,
) -> MetricCode:
    n_rknots = 0
    n_sknots = 0
    blocks = []
    if rkind == WARP_SPLINE:
        if r_spline is None:
            raise ValueError("rkind is spline but no radial block given")
        n_rknots = (len(r_spline) - 2) // 4 + 1
        blocks.append(r_spline)
    if skind == WARP_SPLINE:
        if s_spline is None:
            raise ValueError("skind is spline but no angular block given")
        n_sknots = (len(s_spline) - 2) // 4 + 1
        blocks.append(s_spline)
    ints = np.array(
        [FAMILY_WARPED, 2, rkind, skind, left_end, right_end, n_rknots, n_sknots],
        dtype=np.int64,
    )
    head = np.zeros(_WARPED_HEADER, dtype=np.float64)
    head[0] = r_lo
    head[1] = r_hi
    head[2] = fiber_len
    head[3] = sig_left
    head[4] = sig_right
    head[8:12] = rparams
    head[12:16] = sparams
    floats = np.concatenate([head] + blocks) if blocks else head
    return MetricCode(ints, floats)


def pack_bundle(
    k: int,
    base_kind: int,
    base_len: float = 0.0,
    a0: np.ndarray | None = None,
    a1: np.ndarray | None = None,
    b1: np.ndarray | None = None,
) -> MetricCode:
    dim = k + (0 if base_kind == BASE_POINT else 1)
    ints = np.array([FAMILY_BUNDLE, dim, k, base_kind, 0, 0, 0, 0], dtype=np.int64)
    k2 = k * k
    floats = np.zeros(1 + 3 * k2, dtype=np.float64)
    floats[0] = base_len
    for slot, mat in enumerate((a0, a1, b1)):
        if mat is not None:
            m = np.asarray(mat, dtype=np.float64)
            if m.shape != (k, k):
                raise ValueError(f"connection block must be {k}x{k}")
            floats[1 + slot * k2 : 1 + (slot + 1) * k2] = m.reshape(-1)
    return MetricCode(ints, floats)


def warped_spline_offsets(ints: np.ndarray) -> tuple[int, int]:
    """Float offsets of the radial and angular spline blocks."""
    r_off = _WARPED_HEADER
    n_rknots = int(ints[6])
    s_off = r_off + (2 + 4 * (n_rknots - 1) if n_rknots else 0)
    return r_off, s_off
