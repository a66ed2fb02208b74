"""Plug-in entropy estimation over the resolution ladder.

``entropy_curve`` runs one seeded batch through a system and, per dyadic
resolution n = 2^k, estimates the marginal cell entropy, the cell entropy
conditioned on the output, and the output's own cell entropy. Two
conditioning modes exist:

* ``atom-oracle`` uses the system's declared structure. Output atoms key
  exactly; off the atoms, each declared invertible piece contributes the grid
  cell of its candidate preimage, so the key is the tuple of input cells
  consistent with the observed output. The key is a function of the output
  alone and carries exactly the information the output holds about the input
  cell, which makes the conditional estimate unbiased up to histogram noise
  for the whole structured catalog.
* ``two-sided`` is the generic fallback: the output is binned on its own grid
  at m = factor*n. Its bias decays only as m/n grows, which is why the
  structured mode is preferred whenever declared.

Counting is sort-based and reduced in ascending key order, so results do not
depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DataError
from .measure import Box, DistributionSpec, sample
from .quantizer import CellGrid, quantize_batch
from .systems import Componentwise, SystemSpec

_LN2 = math.log(2.0)

#: a row is flagged unreliable when samples < OCCUPANCY_FACTOR * distinct bins
OCCUPANCY_FACTOR = 10
MIN_SAMPLES = 1000
DEFAULT_M_FACTOR = 16
_PACK_LIMIT = 1 << 62


class ConditioningKey(NamedTuple):
    """Decoded conditioning key: ('atom', index) for an exact output atom,
    ('cells', candidate-cell tuple) for structured continuous outputs, or
    ('bin', packed output cell) in two-sided mode."""

    kind: str
    value: tuple


# ---------------------------------------------------------------------------
# histogram estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinCounts:
    """Occupancy histogram: positive counts per occupied cell."""

    counts: np.ndarray
    keys: np.ndarray | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise DataError("counts must be a vector")
        if np.any(counts < 0):
            raise DataError("counts must be nonnegative")
        counts = counts[counts > 0]
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_cells(cls, packed):
        keys, counts = np.unique(np.asarray(packed, dtype=np.int64),
                                 return_counts=True)
        return cls(counts=counts, keys=keys)

    @property
    def total(self):
        return int(self.counts.sum())


def plugin_entropy(counts, miller_madow=False):
    """Shannon entropy (bits) of the empirical cell frequencies.

    Optionally adds the Miller-Madow bias correction
    (distinct - 1) / (2 * total * ln 2).
    """
    bc = counts if isinstance(counts, BinCounts) else BinCounts(np.asarray(counts))
    total = bc.total
    if total < 1:
        raise DataError("plugin_entropy needs a nonempty histogram")
    c = bc.counts
    h = (math.log(total) - float(np.sum(c * np.log(c))) / total) / _LN2
    if miller_madow:
        h += (c.size - 1) / (2.0 * total * _LN2)
    return max(h, 0.0)


def conditional_entropy(groups, miller_madow=False):
    """Weighted plug-in entropy over conditioning groups (bits):
    sum over groups of (group total / grand total) * group entropy."""
    if not groups:
        raise DataError("conditional_entropy needs at least one group")
    items = list(groups.values())
    grand = sum(g.total for g in items)
    if grand < 1:
        raise DataError("conditional_entropy needs nonempty groups")
    return float(sum(g.total / grand * plugin_entropy(g, miller_madow)
                     for g in items))


# ---------------------------------------------------------------------------
# conditioning key codecs
# ---------------------------------------------------------------------------

class StructureKeyCodec:
    """Exact conditioning keys from declared system structure at one
    resolution. Codes below the atom count are atom indices; the rest encode,
    per invertible piece, the candidate preimage cell (or absence)."""

    def __init__(self, system: SystemSpec, support: Box, n: int):
        if isinstance(system, Componentwise):
            if not system.has_structure:
                raise ConfigurationError(
                    f"{system.label()} declares no structure; use two-sided mode")
            self._sub = [StructureKeyCodec(p, support.axis(i), n)
                         for i, p in enumerate(system.parts)]
            bound = 1
            for s in self._sub:
                bound *= s.bound
                if bound >= _PACK_LIMIT:
                    raise ConfigurationError(
                        "conditioning keys overflow; lower k_max or dimension")
            self.bound = bound
            self._atoms = None
        else:
            pieces = system.pieces()
            if pieces is None:
                raise ConfigurationError(
                    f"{system.label()} declares no structure; use two-sided mode")
            self._sub = None
            self._atoms = system.atoms()
            self._pieces = pieces
            self._grid = CellGrid(support, n)
            radix = self._grid.total_cells + 1
            bound = len(self._atoms)
            combos = 1
            for _ in pieces:
                combos *= radix
                if combos >= _PACK_LIMIT:
                    raise ConfigurationError(
                        "conditioning keys overflow; lower k_max or dimension")
            self.bound = bound + combos
            self._radix = radix
        self.n = n
        self.system = system
        self.support = support

    def codes(self, y):
        if self._sub is not None:
            out = self._sub[0].codes(y[:, 0:1])
            for i, sub in enumerate(self._sub[1:], start=1):
                out = out * sub.bound + sub.codes(y[:, i:i + 1])
            return out
        t = y.shape[0]
        combo = np.zeros(t, dtype=np.int64)
        for piece in self._pieces:
            cand = np.zeros(t, dtype=np.int64)
            m = piece.mask(y)
            if np.any(m):
                coords = quantize_batch(piece.inverse(y[m]), self.n)
                cand[m] = self._grid.pack_clipped(coords) + 1
            combo = combo * self._radix + cand
        out = combo + len(self._atoms)
        for i, atom in enumerate(self._atoms):
            hit = np.all(y == atom.y, axis=1)
            out[hit] = i
        return out

    def describe(self, code) -> ConditioningKey:
        code = int(code)
        if self._sub is not None:
            parts = []
            for sub in reversed(self._sub):
                parts.append(sub.describe(code % sub.bound))
                code //= sub.bound
            return ConditioningKey("cells", tuple(reversed(parts)))
        if code < len(self._atoms):
            return ConditioningKey("atom", (code,))
        combo = code - len(self._atoms)
        cells = []
        for _ in self._pieces:
            cand = combo % self._radix
            combo //= self._radix
            cells.append(None if cand == 0
                         else tuple(self._grid.unpack(cand - 1)[0].tolist()))
        return ConditioningKey("cells", tuple(reversed(cells)))


class BinKeyCodec:
    """Two-sided fallback: keys are output cells on a grid at resolution m."""

    def __init__(self, ybox: Box, m: int):
        self.m = m
        self._grid = CellGrid(ybox, m)
        self.bound = self._grid.total_cells

    def codes(self, y):
        return self._grid.pack(quantize_batch(y, self.m))

    def describe(self, code) -> ConditioningKey:
        return ConditioningKey("bin", tuple(self._grid.unpack(code)[0].tolist()))


def resolve_mode(system: SystemSpec, mode: str) -> str:
    if mode == "auto":
        return "atom-oracle" if system.has_structure else "two-sided"
    if mode not in ("atom-oracle", "two-sided"):
        raise ConfigurationError(f"unknown estimator mode '{mode}'")
    if mode == "atom-oracle" and not system.has_structure:
        raise ConfigurationError(
            f"{system.label()} declares no structure; atom-oracle mode "
            "is unavailable")
    return mode


def make_codec(system, support, ybox, n, mode, m_factor=DEFAULT_M_FACTOR):
    if mode == "atom-oracle":
        return StructureKeyCodec(system, support, n)
    return BinKeyCodec(ybox, m_factor * n)


# ---------------------------------------------------------------------------
# entropy curve over the dyadic ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    k: int
    n: int
    h_marginal: float
    h_conditional: float
    h_output: float
    distinct_bins: int
    distinct_keys: int
    distinct_pairs: int
    distinct_output_bins: int
    reliable: bool

    @property
    def ratio(self):
        if self.h_marginal <= 0:
            return 0.0
        return min(max(self.h_conditional / self.h_marginal, 0.0), 1.0)


@dataclass(frozen=True)
class EntropyCurve:
    """Per-resolution entropy estimates from one shared sample batch."""

    rows: tuple
    sample_count: int
    seed: int
    mode: str
    dist_label: str
    system_label: str
    dim_in: int
    dim_out: int

    def reliable_rows(self):
        return [r for r in self.rows if r.reliable]

    def marginal_points(self, reliable_only=True):
        rows = self.reliable_rows() if reliable_only else list(self.rows)
        return [(r.k, r.h_marginal) for r in rows]

    def conditional_points(self, reliable_only=True):
        rows = self.reliable_rows() if reliable_only else list(self.rows)
        return [(r.k, r.h_conditional) for r in rows]

    def output_points(self, reliable_only=True):
        rows = self.reliable_rows() if reliable_only else list(self.rows)
        return [(r.k, r.h_output) for r in rows]

    def finest_reliable(self):
        rows = self.reliable_rows()
        return rows[-1] if rows else None


def _sorted_entropy(keys):
    h, distinct = _kernels.entropy_sorted(np.sort(keys))
    return max(float(h), 0.0), int(distinct)


def _conditional(ckeys, xkeys):
    order = np.lexsort((xkeys, ckeys))
    h_joint, h_c, n_pairs, n_groups = _kernels.joint_entropy_sorted(
        ckeys[order], xkeys[order])
    return float(h_joint), float(h_c), int(n_pairs), int(n_groups)


def _ladder(k_range):
    ks = sorted(int(k) for k in k_range)
    if not ks:
        raise ConfigurationError("k range is empty")
    if ks[0] < 1 or len(set(ks)) != len(ks):
        raise ConfigurationError("k values must be distinct integers >= 1")
    return ks


def entropy_curve(dist: DistributionSpec, system: SystemSpec, k_range,
                  sample_count, seed, mode="auto",
                  m_factor=DEFAULT_M_FACTOR, miller_madow=False):
    """Estimate H(input cells), H(input cells | output), H(output cells)
    per ladder resolution from a single seeded batch."""
    ks = _ladder(k_range)
    sample_count = int(sample_count)
    if sample_count < MIN_SAMPLES:
        raise ConfigurationError(f"sample_count must be >= {MIN_SAMPLES}")
    if system.dim_in is not None and system.dim_in != dist.dim:
        raise ConfigurationError(
            f"system {system.label()} expects dimension {system.dim_in}, "
            f"distribution has {dist.dim}")
    mode = resolve_mode(system, mode)

    batch = sample(dist, sample_count, seed)
    points = batch.points
    y = system.apply(points)
    support = dist.support_box()
    ybox = Box(y.min(axis=0), y.max(axis=0))

    rows = []
    prev_h = -np.inf
    for k in ks:
        n = 1 << k
        xgrid = CellGrid(support, n)
        xkeys = xgrid.pack(quantize_batch(points, n))
        h_marg, distinct = _sorted_entropy(xkeys)

        codec = make_codec(system, support, ybox, n, mode, m_factor)
        ckeys = codec.codes(y)
        h_joint, h_c, n_pairs, n_groups = _conditional(ckeys, xkeys)
        h_cond = max(h_joint - h_c, 0.0)

        ykeys = CellGrid(ybox, n).pack(quantize_batch(y, n))
        h_out, distinct_out = _sorted_entropy(ykeys)

        if h_cond > h_marg + 1e-9:
            raise AssertionError(
                f"conditioning increased entropy at k={k}: "
                f"{h_cond} > {h_marg}")
        if h_marg < prev_h - 1e-9:
            raise AssertionError(
                f"marginal entropy decreased on refinement at k={k}")
        prev_h = h_marg

        if miller_madow:
            h_marg += (distinct - 1) / (2.0 * sample_count * _LN2)
            h_cond += (n_pairs - n_groups) / (2.0 * sample_count * _LN2)
            h_out += (distinct_out - 1) / (2.0 * sample_count * _LN2)

        # occupancy guard: the conditional histogram lives on the (key, cell)
        # pairs, so its support gates reliability alongside the marginal bins
        rows.append(CurveRow(
            k=k, n=n, h_marginal=h_marg, h_conditional=h_cond, h_output=h_out,
            distinct_bins=distinct, distinct_keys=n_groups,
            distinct_pairs=n_pairs, distinct_output_bins=distinct_out,
            reliable=sample_count >= OCCUPANCY_FACTOR * max(distinct, n_pairs)))

    mode_label = mode if mode == "atom-oracle" else f"two-sided({m_factor})"
    return EntropyCurve(
        rows=tuple(rows), sample_count=sample_count, seed=seed,
        mode=mode_label, dist_label=dist.label(), system_label=system.label(),
        dim_in=dist.dim, dim_out=y.shape[1])


# ---------------------------------------------------------------------------
# per-component curves for the componentwise bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentCurves:
    """Per input axis: entropy curves of that axis's cells conditioned on
    the full output ('vs_full') and on the matching output component alone
    ('vs_own')."""

    vs_full: tuple
    vs_own: tuple


def component_curves(dist, system, k_range, sample_count, seed, mode="auto",
                     m_factor=DEFAULT_M_FACTOR):
    """Shared-batch per-axis curves feeding the componentwise loss bound."""
    ks = _ladder(k_range)
    if dist.dim < 2:
        raise ConfigurationError("componentwise bound needs dimension >= 2")
    if not dist.is_product:
        raise ConfigurationError(
            "componentwise bound is implemented for product distributions only")
    if not (dist.is_continuous and dist.dim == (system.dim_in or dist.dim)):
        raise ConfigurationError("componentwise bound needs a continuous "
                                 "product law matching the system dimension")
    mode = resolve_mode(system, mode)

    batch = sample(dist, int(sample_count), seed)
    points = batch.points
    y = system.apply(points)
    support = dist.support_box()
    ybox = Box(y.min(axis=0), y.max(axis=0))
    n_axes = dist.dim

    own_structured = (mode == "atom-oracle" and isinstance(system, Componentwise)
                      and y.shape[1] == n_axes)

    rows_full = [[] for _ in range(n_axes)]
    rows_own = [[] for _ in range(n_axes)]
    for k in ks:
        n = 1 << k
        codec = make_codec(system, support, ybox, n, mode, m_factor)
        full_keys = codec.codes(y)
        for i in range(n_axes):
            axis_grid = CellGrid(support.axis(i), n)
            xkeys = axis_grid.pack(quantize_batch(points[:, i:i + 1], n))
            h_marg, distinct = _sorted_entropy(xkeys)

            h_joint, h_c, n_pairs, n_groups = _conditional(full_keys, xkeys)
            rows_full[i].append(CurveRow(
                k=k, n=n, h_marginal=h_marg,
                h_conditional=max(h_joint - h_c, 0.0), h_output=0.0,
                distinct_bins=distinct, distinct_keys=n_groups,
                distinct_pairs=n_pairs, distinct_output_bins=0,
                reliable=batch.count >= OCCUPANCY_FACTOR * max(distinct, n_pairs)))

            if own_structured:
                own = StructureKeyCodec(system.parts[i], support.axis(i), n
                                        ).codes(y[:, i:i + 1])
            else:
                own = BinKeyCodec(ybox.axis(i), m_factor * n).codes(y[:, i:i + 1])
            h_joint, h_c, n_pairs, n_groups = _conditional(own, xkeys)
            rows_own[i].append(CurveRow(
                k=k, n=n, h_marginal=h_marg,
                h_conditional=max(h_joint - h_c, 0.0), h_output=0.0,
                distinct_bins=distinct, distinct_keys=n_groups,
                distinct_pairs=n_pairs, distinct_output_bins=0,
                reliable=batch.count >= OCCUPANCY_FACTOR * max(distinct, n_pairs)))

    mode_label = mode if mode == "atom-oracle" else f"two-sided({m_factor})"

    def curve(rows, tag):
        return EntropyCurve(
            rows=tuple(rows), sample_count=batch.count, seed=batch.seed,
            mode=mode_label, dist_label=dist.label(),
            system_label=f"{system.label()}[{tag}]", dim_in=1,
            dim_out=y.shape[1])

    return ComponentCurves(
        vs_full=tuple(curve(rows_full[i], f"axis{i}|Y") for i in range(n_axes)),
        vs_own=tuple(curve(rows_own[i], f"axis{i}|Y{i}") for i in range(n_axes)))
