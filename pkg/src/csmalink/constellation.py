"""Square QAM constellations with per-axis Gray labeling.

A label is a D-bit integer (D = log2(order)). The high D/2 bits select the
in-phase column, the low D/2 bits the quadrature row, each through a
reflected-binary Gray code, so horizontally or vertically adjacent points
always differ in exactly one label bit. Points are scaled to unit average
symbol energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SUPPORTED_ORDERS = (4, 16, 64, 256, 1024, 4096)

# Rows of the (n, M) squared-distance matrix built by nearest_points are
# processed in chunks of at most this many entries.
_DETECT_CHUNK_ENTRIES = 4_000_000


def gray_encode(n: int | np.ndarray) -> int | np.ndarray:
    """Reflected-binary Gray code of n."""
    return n ^ (n >> 1)


def gray_decode(g: np.ndarray) -> np.ndarray:
    """Inverse of gray_encode, vectorized over integer arrays."""
    b = np.array(g, copy=True)
    shift = 1
    while shift < b.itemsize * 8:
        b ^= b >> shift
        shift *= 2
    return b


@dataclass(frozen=True)
class Constellation:
    """An order-M grid of complex points indexed by label.

    ``points[label]`` is the complex coordinate carrying that label, so the
    label <-> point-index maps are the identity by construction.
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray

    def point_of_label(self, label: int) -> complex:
        if not 0 <= label < self.order:
            raise ValueError(f"label {label} outside [0, {self.order})")
        return complex(self.points[label])

    def label_of_point(self, index: int) -> int:
        if not 0 <= index < self.order:
            raise ValueError(f"point index {index} outside [0, {self.order})")
        return index


@dataclass(frozen=True)
class MinDistanceReport:
    """Minimum Euclidean distances, overall and per allocated user set."""

    full_constellation_dmin: float
    per_user_dmin: tuple[float, ...] | None = None


def build_qam(order: int) -> Constellation:
    """Build a unit-energy square QAM constellation.

    Args:
        order: number of points; must be one of SUPPORTED_ORDERS.

    Returns:
        Constellation whose points array is ordered by label.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(
            f"unsupported constellation order {order}; expected one of {SUPPORTED_ORDERS}"
        )
    bits = order.bit_length() - 1
    side = 1 << (bits // 2)
    labels = np.arange(order)
    col = gray_decode(labels >> (bits // 2))
    row = gray_decode(labels & (side - 1))
    # Odd-integer lattice {..,-3,-1,1,3,..} scaled so mean |p|^2 == 1.
    scale = math.sqrt(2.0 * (order - 1) / 3.0)
    i_axis = (2 * col - (side - 1)) / scale
    q_axis = (2 * row - (side - 1)) / scale
    return Constellation(order=order, bits_per_symbol=bits, points=i_axis + 1j * q_axis)


def nearest_point(constellation: Constellation, received: complex) -> int:
    """Index of the constellation point closest to ``received``.

    Exact ties resolve to the lowest point index.
    """
    return int(nearest_points(constellation, np.asarray([received]))[0])


def nearest_points(constellation: Constellation, received: np.ndarray) -> np.ndarray:
    """Vectorized minimum-distance detection.

    Args:
        received: complex samples, any shape.

    Returns:
        int array of point indices, same shape as ``received``.
    """
    pts = constellation.points
    flat = np.ascontiguousarray(received, dtype=np.complex128).reshape(-1)
    out = np.empty(flat.shape, dtype=np.int64)
    chunk = max(1, _DETECT_CHUNK_ENTRIES // len(pts))
    for start in range(0, len(flat), chunk):
        block = flat[start : start + chunk]
        d2 = (block.real[:, None] - pts.real[None, :]) ** 2
        d2 += (block.imag[:, None] - pts.imag[None, :]) ** 2
        # argmin keeps the first (lowest-index) minimum on ties
        out[start : start + chunk] = np.argmin(d2, axis=1)
    return out.reshape(np.shape(received))


def min_distance(constellation: Constellation, plan=None) -> MinDistanceReport:
    """Minimum pairwise distance of the grid, optionally per user of a plan.

    A user holding a single point reports ``math.inf``.
    """
    full = _pairwise_min(constellation.points)
    if plan is None:
        return MinDistanceReport(full_constellation_dmin=full)
    if plan.order != constellation.order:
        raise ValueError(
            f"plan order {plan.order} does not match constellation order {constellation.order}"
        )
    per_user = tuple(
        _pairwise_min(constellation.points[np.fromiter(u.codewords, dtype=np.int64)])
        for u in plan.users
    )
    return MinDistanceReport(full_constellation_dmin=full, per_user_dmin=per_user)


def _pairwise_min(points: np.ndarray) -> float:
    n = len(points)
    if n < 2:
        return math.inf
    best = math.inf
    chunk = max(1, _DETECT_CHUNK_ENTRIES // n)
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        d2 = (block.real[:, None] - points.real[None, :]) ** 2
        d2 += (block.imag[:, None] - points.imag[None, :]) ** 2
        rows = np.arange(start, min(start + chunk, n))
        d2[rows - start, rows] = np.inf  # exclude self-distances
        best = min(best, float(d2.min()))
    return math.sqrt(best)
