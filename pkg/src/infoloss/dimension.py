"""Information-dimension estimates: regression of cell entropy against k.

On the dyadic ladder, cell entropy of a d-dimensional law grows like
d*k + h (bits), so the least-squares slope over k estimates the dimension
and the intercept estimates the d-dimensional entropy in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError

MIN_ROWS = 3


@dataclass(frozen=True)
class DimensionFit:
    """Slope (dimension), intercept (bits), RMS residual, and the k values
    that entered the fit."""

    slope: float
    intercept: float
    residual: float
    rows_used: tuple

    def __str__(self):
        return (f"d={self.slope:.3f} (intercept {self.intercept:+.3f} bits, "
                f"rms {self.residual:.3g})")


def fit_dimension(points) -> DimensionFit:
    """Ordinary least squares of entropy (bits) against k over >= 3 rows.

    ``points`` is a sequence of (k, H) pairs, e.g. a curve column from
    ``EntropyCurve.marginal_points``.
    """
    pts = [(int(k), float(h)) for k, h in points]
    if len(pts) < MIN_ROWS:
        raise InsufficientDataError(
            f"dimension fit needs >= {MIN_ROWS} reliable rows, got {len(pts)}")
    ks = np.array([p[0] for p in pts], dtype=np.float64)
    hs = np.array([p[1] for p in pts], dtype=np.float64)
    slope, intercept = np.polyfit(ks, hs, 1)
    resid = hs - (slope * ks + intercept)
    return DimensionFit(slope=float(slope), intercept=float(intercept),
                        residual=float(np.sqrt(np.mean(resid ** 2))),
                        rows_used=tuple(int(k) for k in ks))


def marginal_dimension(curve) -> DimensionFit:
    """Dimension of the input law from the marginal column (reliable rows)."""
    return fit_dimension(curve.marginal_points(reliable_only=True))


def conditional_dimension(curve) -> DimensionFit:
    """Expected conditional dimension of the input given the output, from the
    conditional column (reliable rows)."""
    return fit_dimension(curve.conditional_points(reliable_only=True))


def output_dimension(curve) -> DimensionFit:
    """Dimension of the output law from the output column (reliable rows)."""
    return fit_dimension(curve.output_points(reliable_only=True))
