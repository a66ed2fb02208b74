"""Uniform grid quantization: bin indices, dyadic refinement, cell packing.

The grid at resolution n has hypercube cells of side 1/n; a point lands in
the cell ``floor(n*x)`` per axis (toward -inf), with products within 1e-12 of
an integer snapped upward so edge points bin deterministically. Resolutions
on the dyadic ladder n = 2^k nest exactly: the cell at 2^(k+1) always lies
inside the cell at 2^k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import BOUNDARY_SNAP, floor_snap
from .errors import ConfigurationError, DataError
from .measure import Box

_PACK_LIMIT = 1 << 62


@dataclass(frozen=True)
class BinIndex:
    """Grid cell of one point: integer coords per axis at resolution n."""

    coords: np.ndarray
    n: int

    def __post_init__(self):
        coords = np.atleast_1d(np.asarray(self.coords)).astype(np.int64)
        object.__setattr__(self, "coords", coords)

    def __eq__(self, other):
        return (isinstance(other, BinIndex) and self.n == other.n
                and np.array_equal(self.coords, other.coords))

    def cell_box(self):
        lo = self.coords / self.n
        return Box(lo, lo + 1.0 / self.n)


def quantize(x, n):
    """Bin index of point ``x`` on the side-1/n grid."""
    n = int(n)
    if n < 1:
        raise ConfigurationError("resolution n must be >= 1")
    pt = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(pt)):
        raise DataError("cannot quantize non-finite input")
    return BinIndex(coords=floor_snap(pt * n), n=n)


def quantize_batch(points, n):
    """Vectorized bin coords, shape (count, dim) int64."""
    n = int(n)
    if n < 1:
        raise ConfigurationError("resolution n must be >= 1")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if not np.all(np.isfinite(pts)):
        raise DataError("cannot quantize non-finite input")
    return floor_snap(pts * n)


def refine(idx, x):
    """Refine a dyadic bin index one ladder step, checking nesting.

    ``idx`` must be the bin of ``x`` at its own resolution; the result is the
    bin at twice the resolution and lies inside the parent cell per axis.
    """
    child = quantize(x, 2 * idx.n)
    parent = quantize(x, idx.n)
    if not np.array_equal(parent.coords, idx.coords):
        raise AssertionError(
            f"refine: index {idx.coords} at n={idx.n} is not the bin of x={x}")
    if not np.all((child.coords >> 1) == idx.coords):
        raise AssertionError(
            f"refine: child {child.coords} escaped parent cell {idx.coords}")
    return child


def cell_midpoint(coords, n):
    """Center point(s) of the cell(s) with the given integer coords."""
    return (np.asarray(coords, dtype=np.float64) + 0.5) / n


class CellGrid:
    """Packs per-axis cell coords over a known support box into scalar int64
    keys (row-major), so batches of cells sort and group as flat arrays."""

    def __init__(self, box: Box, n: int):
        self.n = int(n)
        self.box = box
        lo = floor_snap(box.lo * self.n) - 1
        hi = floor_snap(box.hi * self.n) + 1
        self.lo_idx = lo.astype(np.int64)
        self.extent = (hi - lo + 1).astype(np.int64)
        total = 1
        for e in self.extent:
            total *= int(e)
            if total >= _PACK_LIMIT:
                raise ConfigurationError(
                    "grid too fine to pack cell keys exactly "
                    f"(extents {self.extent.tolist()} at n={self.n})")
        self.total_cells = total
        strides = np.ones(box.dim, dtype=np.int64)
        for i in range(box.dim - 2, -1, -1):
            strides[i] = strides[i + 1] * self.extent[i + 1]
        self.strides = strides

    @property
    def dim(self):
        return self.box.dim

    def pack(self, coords):
        shifted = coords - self.lo_idx
        if np.any(shifted < 0) or np.any(shifted >= self.extent):
            raise DataError("cell coords fall outside the declared support grid")
        return shifted @ self.strides

    def pack_clipped(self, coords):
        # for candidate preimage cells, which may overshoot the support by
        # a cell due to inverse-map rounding
        shifted = np.clip(coords - self.lo_idx, 0, self.extent - 1)
        return shifted @ self.strides

    def unpack(self, keys):
        keys = np.atleast_1d(np.asarray(keys, dtype=np.int64))
        out = np.empty((keys.size, self.dim), dtype=np.int64)
        rem = keys
        for i in range(self.dim):
            out[:, i] = rem // self.strides[i]
            rem = rem % self.strides[i]
        return out + self.lo_idx

    def midpoints(self, keys):
        return cell_midpoint(self.unpack(keys), self.n)


def cell_count_bound(diameter, n, dim):
    """Cap on distinct occupied cells for a support of the given diameter:
    ceil(n*D)^dim (the support fits in a side-D hypercube)."""
    return int(np.ceil(n * diameter - BOUNDARY_SNAP)) ** dim
