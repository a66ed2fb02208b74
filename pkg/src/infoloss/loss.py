"""Absolute and relative information-loss estimates and the closed-form
cross-checks: the slope-ratio and finest-row estimators, the divergence
test for the absolute loss, the componentwise upper bounds, and the
output-dimension gap diagnostic.

The headline number is the slope ratio (conditional dimension over marginal
dimension): the raw conditional/marginal entropy ratio at finite k converges
like 1 - const/k for quantizer-like maps and is reported alongside for
exactly that reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dimension import DimensionFit, conditional_dimension, fit_dimension, \
    marginal_dimension
from .entropy import ComponentCurves, EntropyCurve
from .errors import InsufficientDataError, UndefinedRelativeLossError

#: conditional slope below this means the conditional entropy has leveled
#: off (finite absolute loss); above it the column keeps growing with k and
#: the absolute loss is reported as diverging
DIVERGENCE_SLOPE = 0.05

#: the relative loss is undefined when the input dimension estimate is ~0
MIN_MARGINAL_SLOPE = 0.1


class RelativeLoss(NamedTuple):
    ratio: float       # finest reliable row, conditional/marginal
    slope: float       # conditional slope / marginal slope, clamped to [0,1]
    slope_raw: float   # same before clamping


@dataclass(frozen=True)
class ComponentBound:
    """Right-hand sides of the componentwise loss bound: the mean per-axis
    loss against the full output, and against the matching output component
    (joint loss <= bound_joint <= bound_marginal up to estimator noise)."""

    bound_joint: float
    bound_marginal: float
    per_axis_vs_full: tuple
    per_axis_vs_own: tuple


@dataclass(frozen=True)
class FanoResult:
    satisfied: bool
    margin: float
    pe_max: float
    monotone: bool


@dataclass(frozen=True)
class LossReport:
    """All loss estimates and checks for one run."""

    relative_ratio: float
    relative_slope: float
    relative_slope_raw: float
    analytic: float | None
    absolute: float                      # bits; math.inf means diverging
    conditional_growth: float | None     # bits per ladder step, last 3 steps
    estimator_error: float | None        # |slope - analytic| when analytic
    componentwise: ComponentBound | None
    conjecture_gap: float | None
    fano: FanoResult | None

    @property
    def diverging(self):
        return math.isinf(self.absolute)


def relative_loss(curve: EntropyCurve) -> RelativeLoss:
    """Relative loss estimates: finest-row ratio and slope ratio.

    Raises UndefinedRelativeLossError when the marginal slope is ~0 (a
    discrete input carries no dimension to normalize by).
    """
    marg = marginal_dimension(curve)
    cond = conditional_dimension(curve)
    if marg.slope < MIN_MARGINAL_SLOPE:
        raise UndefinedRelativeLossError(
            f"marginal dimension estimate {marg.slope:.3f} is too small for "
            "a relative loss")
    finest = curve.finest_reliable()
    if finest is None:
        raise InsufficientDataError("no reliable rows in curve")
    raw = cond.slope / marg.slope
    return RelativeLoss(ratio=finest.ratio,
                        slope=min(max(raw, 0.0), 1.0), slope_raw=raw)


def conditional_growth(curve: EntropyCurve):
    """Mean increase of the conditional column per step over the last three
    ladder steps (None with fewer than four reliable rows)."""
    pts = curve.conditional_points(reliable_only=True)
    if len(pts) < 4:
        return None
    hs = [h for _, h in pts[-4:]]
    return float(np.mean(np.diff(hs)))


def absolute_loss(curve: EntropyCurve) -> float:
    """Absolute loss in bits: the level the conditional column converges to,
    or inf ("diverging") when the column still grows along the ladder."""
    cond = conditional_dimension(curve)
    if cond.slope >= DIVERGENCE_SLOPE:
        return math.inf
    pts = curve.conditional_points(reliable_only=True)
    tail = [h for _, h in pts[-3:]]
    return float(np.mean(tail))


def _curve_loss_slope(curve: EntropyCurve) -> float:
    marg = fit_dimension(curve.marginal_points())
    cond = fit_dimension(curve.conditional_points())
    if marg.slope < MIN_MARGINAL_SLOPE:
        raise UndefinedRelativeLossError(
            "per-axis marginal dimension estimate is too small")
    return min(max(cond.slope / marg.slope, 0.0), 1.0)


def componentwise_bound(curves: ComponentCurves):
    """Upper bounds on the joint relative loss from per-axis curves: the mean
    per-axis loss vs the full output and vs the own output component."""
    vs_full = tuple(_curve_loss_slope(c) for c in curves.vs_full)
    vs_own = tuple(_curve_loss_slope(c) for c in curves.vs_own)
    return ComponentBound(
        bound_joint=float(np.mean(vs_full)),
        bound_marginal=float(np.mean(vs_own)),
        per_axis_vs_full=vs_full, per_axis_vs_own=vs_own)


def conjecture_gap(loss_slope: float, dx_fit: DimensionFit,
                   dy_fit: DimensionFit) -> float:
    """Diagnostic gap loss - (1 - d(output)/d(input)). Zero on every catalog
    case where the output dimension is the input dimension minus the lost
    mass; reported, never asserted."""
    if dx_fit.slope < MIN_MARGINAL_SLOPE:
        raise UndefinedRelativeLossError(
            "input dimension estimate is too small for the gap diagnostic")
    return float(loss_slope - (1.0 - dy_fit.slope / dx_fit.slope))
