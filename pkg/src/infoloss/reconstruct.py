"""Cell-level MAP reconstruction and the loss lower bound on its error.

The reconstructor maps each conditioning key (output atom or candidate-cell
tuple) to the input cell most often seen with it in training; at the cell
level this empirical MAP rule minimizes the error probability given the
training histogram. Its held-out error, as the grid refines, is bounded from
below by the relative information loss, with equality when the map is
invertible off its constant sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .entropy import StructureKeyCodec
from .errors import ConfigurationError
from .loss import FanoResult, LossReport
from .measure import DistributionSpec, sample
from .quantizer import CellGrid, quantize_batch
from .systems import SystemSpec

#: tolerance on the bound check: satisfied iff pe_max + FANO_SLACK >= loss
FANO_SLACK = 0.02
#: allowed nonmonotonicity of the error sequence (sampling noise)
PE_NOISE = 0.01


@dataclass(frozen=True)
class Reconstructor:
    """Trained MAP rule at one resolution: conditioning key -> modal input
    cell (ties broken toward the lexicographically smallest cell); keys
    unseen in training fall back to the globally modal cell."""

    system: SystemSpec
    n: int
    keys: np.ndarray = field(repr=False)         # sorted trained key codes
    modal_cells: np.ndarray = field(repr=False)  # packed cell per key
    global_modal: int
    training_count: int
    train_seed: int
    codec: StructureKeyCodec = field(repr=False)
    grid: CellGrid = field(repr=False)

    def predict_cells(self, y):
        """Packed reconstructed cell per output row."""
        codes = self.codec.codes(np.atleast_2d(y))
        pos = np.searchsorted(self.keys, codes)
        pos = np.minimum(pos, self.keys.size - 1)
        hit = self.keys[pos] == codes
        out = np.where(hit, self.modal_cells[pos], self.global_modal)
        return out

    def predict_points(self, y):
        """Reconstructed representative points (cell midpoints)."""
        return self.grid.midpoints(self.predict_cells(y))

    def rule_items(self):
        """Decoded (ConditioningKey, cell coords) pairs, for inspection."""
        coords = self.grid.unpack(self.modal_cells)
        return [(self.codec.describe(k), tuple(coords[i].tolist()))
                for i, k in enumerate(self.keys)]


def train_map_reconstructor(dist: DistributionSpec, system: SystemSpec,
                            n: int, sample_count, seed) -> Reconstructor:
    """Fit the modal-cell rule on a fresh seeded batch (structured systems
    only; the conditioning keys must be exact)."""
    if not system.has_structure:
        raise ConfigurationError(
            f"{system.label()} declares no structure; the MAP reconstructor "
            "needs atom-oracle conditioning")
    batch = sample(dist, int(sample_count), seed)
    y = system.apply(batch.points)
    support = dist.support_box()
    grid = CellGrid(support, n)
    xkeys = grid.pack(quantize_batch(batch.points, n))
    codec = StructureKeyCodec(system, support, n)
    ckeys = codec.codes(y)

    order = np.lexsort((xkeys, ckeys))
    groups, modal = _kernels.group_modal(ckeys[order], xkeys[order])
    xs = np.sort(xkeys)
    _, global_modal = _kernels.group_modal(np.zeros_like(xs), xs)
    return Reconstructor(
        system=system, n=int(n), keys=groups, modal_cells=modal,
        global_modal=int(global_modal[0]), training_count=batch.count,
        train_seed=batch.seed, codec=codec, grid=grid)


def error_probability(rec: Reconstructor, dist: DistributionSpec,
                      system: SystemSpec, eval_count, seed) -> float:
    """Held-out fraction of samples whose input cell differs from the rule's
    reconstruction. The evaluation seed must differ from the training seed."""
    if int(seed) == rec.train_seed:
        raise ConfigurationError(
            "evaluation seed equals the training seed; use a disjoint batch")
    batch = sample(dist, int(eval_count), seed)
    y = system.apply(batch.points)
    xkeys = rec.grid.pack(quantize_batch(batch.points, rec.n))
    return float(np.mean(rec.predict_cells(y) != xkeys))


def error_curve(dist, system, k_range, train_count, eval_count,
                train_seed, eval_seed):
    """(k, error probability) per ladder resolution, fresh rule per k."""
    out = []
    for k in sorted(int(k) for k in k_range):
        rec = train_map_reconstructor(dist, system, 1 << k, train_count,
                                      train_seed)
        out.append((k, error_probability(rec, dist, system, eval_count,
                                         eval_seed)))
    return out


def fano_check(report: LossReport, pe_sequence) -> FanoResult:
    """Check that the peak reconstruction error dominates the relative loss.

    ``pe_sequence`` is a list of (k, error) pairs; it should be nondecreasing
    within PE_NOISE (the error only grows as cells shrink), and the bound is
    satisfied iff max error + FANO_SLACK >= the relative-loss slope estimate.
    """
    pes = [float(p) for _, p in pe_sequence]
    if not pes:
        raise ConfigurationError("fano_check needs a nonempty error sequence")
    loss = report.relative_slope if isinstance(report, LossReport) else float(report)
    pe_max = max(pes)
    monotone = all(b >= a - PE_NOISE for a, b in zip(pes, pes[1:]))
    return FanoResult(satisfied=pe_max + FANO_SLACK >= loss,
                      margin=pe_max - loss, pe_max=pe_max, monotone=monotone)
