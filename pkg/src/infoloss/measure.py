"""Input distributions: declarative specs, seeded sampling, exact probability queries.

Every admissible law has bounded support (the compactness hypothesis behind
the analytic loss values and the reconstruction bound); Gaussians therefore
enter only in truncated form. Sampling uses the counter-based Philox4x64
generator keyed by the experiment seed: chunk ``i`` of a batch draws from the
stream starting at counter ``i * 2**128``, so regeneration is bit-identical
for a given (spec, count, seed) regardless of worker count or chunk schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigurationError

_CHUNK = 1 << 17
_MASK64 = (1 << 64) - 1


def _vec(x, name="value"):
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be a scalar or 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] (closed); lo/hi entries may be +-inf for
    piece images, but regions and supports are finite."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigurationError("box lo/hi must be vectors of equal length")
        if np.any(hi < lo):
            raise ConfigurationError("box needs hi >= lo componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def corners(self):
        if self.dim > 20:
            raise ConfigurationError("box corner enumeration limited to 20 axes")
        grids = np.meshgrid(*[(lo, hi) for lo, hi in zip(self.lo, self.hi)],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def axis(self, i):
        return Box(self.lo[i:i + 1], self.hi[i:i + 1])


def as_box(region, dim=None):
    if isinstance(region, Box):
        box = region
    else:
        lo, hi = region
        box = Box(_vec(lo, "region lo"), _vec(hi, "region hi"))
    if dim is not None and box.dim != dim:
        raise ConfigurationError(
            f"region has dimension {box.dim}, expected {dim}")
    return box


class DistributionSpec:
    """Base class for the declarative input laws.

    Subclasses are immutable and expose: ``dim``, chunk sampling, exact
    region probabilities, the support box, and the support's extreme points
    (for exact diameters of unions/products).
    """

    dim: int
    is_continuous: bool
    is_product: bool

    def sample_at(self, gen, count):
        raise NotImplementedError

    def region_prob(self, region):
        raise NotImplementedError

    def support_box(self) -> Box:
        raise NotImplementedError

    def support_corners(self) -> np.ndarray:
        raise NotImplementedError

    def marginal(self, axis) -> "DistributionSpec":
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return self.label()


@dataclass(frozen=True, repr=False)
class UniformBox(DistributionSpec):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _vec(self.lo, "uniform-box lo")
        hi = _vec(self.hi, "uniform-box hi")
        if lo.shape != hi.shape:
            raise ConfigurationError("uniform-box lo/hi lengths differ")
        if np.any(hi <= lo):
            raise ConfigurationError("uniform-box needs hi > lo componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    is_continuous = True
    is_product = True

    def sample_at(self, gen, count):
        u = gen.random((count, self.dim))
        return self.lo + u * (self.hi - self.lo)

    def region_prob(self, region):
        box = as_box(region, self.dim)
        overlap = np.minimum(box.hi, self.hi) - np.maximum(box.lo, self.lo)
        if np.any(overlap <= 0):
            return 0.0
        return float(np.prod(overlap / (self.hi - self.lo)))

    def support_box(self):
        return Box(self.lo, self.hi)

    def support_corners(self):
        return self.support_box().corners()

    def marginal(self, axis):
        return UniformBox(self.lo[axis:axis + 1], self.hi[axis:axis + 1])

    def label(self):
        if self.dim == 1:
            return f"uniform[{self.lo[0]:g},{self.hi[0]:g}]"
        return "uniform-box" + "x".join(
            f"[{l:g},{h:g}]" for l, h in zip(self.lo, self.hi))

    def to_config(self):
        return {"kind": "uniform-box", "lo": self.lo.tolist(),
                "hi": self.hi.tolist()}


@dataclass(frozen=True, repr=False)
class TruncatedGaussian(DistributionSpec):
    """Componentwise-independent normal, renormalized to the box [lo, hi].

    Sampling is exact via the inverse CDF applied to a uniform draw on the
    truncated CDF range.
    """

    mean: np.ndarray
    sigma: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        mean = _vec(self.mean, "truncated-gaussian mean")
        sigma = _vec(self.sigma, "truncated-gaussian sigma")
        lo = _vec(self.lo, "truncated-gaussian lo")
        hi = _vec(self.hi, "truncated-gaussian hi")
        if not (mean.shape == sigma.shape == lo.shape == hi.shape):
            raise ConfigurationError("truncated-gaussian parameter lengths differ")
        if np.any(sigma <= 0):
            raise ConfigurationError("truncated-gaussian needs sigma > 0")
        if np.any(hi <= lo):
            raise ConfigurationError("truncated-gaussian needs hi > lo")
        for name, val in (("mean", mean), ("sigma", sigma), ("lo", lo), ("hi", hi)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "_cdf_lo", ndtr((lo - mean) / sigma))
        object.__setattr__(self, "_cdf_hi", ndtr((hi - mean) / sigma))

    @property
    def dim(self):
        return self.mean.size

    is_continuous = True
    is_product = True

    def sample_at(self, gen, count):
        u = gen.random((count, self.dim))
        p = self._cdf_lo + u * (self._cdf_hi - self._cdf_lo)
        x = self.mean + self.sigma * ndtri(p)
        return np.clip(x, self.lo, self.hi)

    def region_prob(self, region):
        box = as_box(region, self.dim)
        a = np.maximum(box.lo, self.lo)
        b = np.minimum(box.hi, self.hi)
        if np.any(b <= a):
            return 0.0
        za = ndtr((a - self.mean) / self.sigma)
        zb = ndtr((b - self.mean) / self.sigma)
        return float(np.prod((zb - za) / (self._cdf_hi - self._cdf_lo)))

    def support_box(self):
        return Box(self.lo, self.hi)

    def support_corners(self):
        return self.support_box().corners()

    def marginal(self, axis):
        s = slice(axis, axis + 1)
        return TruncatedGaussian(self.mean[s], self.sigma[s], self.lo[s], self.hi[s])

    def label(self):
        return ("trunc-gauss(" +
                ",".join(f"{m:g}" for m in self.mean) + ";" +
                ",".join(f"{s:g}" for s in self.sigma) + ")")

    def to_config(self):
        return {"kind": "truncated-gaussian", "mean": self.mean.tolist(),
                "sigma": self.sigma.tolist(), "lo": self.lo.tolist(),
                "hi": self.hi.tolist()}


@dataclass(frozen=True, repr=False)
class FiniteDiscrete(DistributionSpec):
    points: np.ndarray  # (M, dim)
    weights: np.ndarray  # (M,)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ConfigurationError("finite-discrete needs a (M, dim) point list")
        if not np.all(np.isfinite(pts)):
            raise ConfigurationError("finite-discrete points must be finite")
        w = _vec(self.weights, "finite-discrete weights")
        if w.size != pts.shape[0]:
            raise ConfigurationError("finite-discrete weights/points lengths differ")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConfigurationError("finite-discrete weights must be >= 0 and sum to 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cum", np.cumsum(w))

    @property
    def dim(self):
        return self.points.shape[1]

    is_continuous = False

    @property
    def is_product(self):
        return self.points.shape[0] == 1 or self.dim == 1

    def sample_at(self, gen, count):
        u = gen.random(count)
        idx = np.searchsorted(self._cum, u, side="right")
        idx = np.minimum(idx, self.points.shape[0] - 1)
        return self.points[idx]

    def region_prob(self, region):
        box = as_box(region, self.dim)
        return float(self.weights[box.contains(self.points)].sum())

    def support_box(self):
        return Box(self.points.min(axis=0), self.points.max(axis=0))

    def support_corners(self):
        return np.unique(self.points, axis=0)

    def marginal(self, axis):
        return FiniteDiscrete(self.points[:, axis:axis + 1], self.weights)

    def label(self):
        return f"discrete({self.points.shape[0]}pts)"

    def to_config(self):
        return {"kind": "finite-discrete", "points": self.points.tolist(),
                "weights": self.weights.tolist()}


@dataclass(frozen=True, repr=False)
class Mixture(DistributionSpec):
    components: tuple  # of (weight, DistributionSpec)

    def __post_init__(self):
        comps = tuple((float(w), spec) for w, spec in self.components)
        if not comps:
            raise ConfigurationError("mixture needs at least one component")
        w = np.array([c[0] for c in comps])
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConfigurationError("mixture weights must be >= 0 and sum to 1")
        dims = {c[1].dim for c in comps}
        if len(dims) != 1:
            raise ConfigurationError("mixture components must share a dimension")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "_cum", np.cumsum(w))

    @property
    def dim(self):
        return self.components[0][1].dim

    @property
    def is_continuous(self):
        return all(c.is_continuous for _, c in self.components)

    @property
    def is_product(self):
        return len(self.components) == 1 and self.components[0][1].is_product

    def sample_at(self, gen, count):
        u = gen.random(count)
        which = np.searchsorted(self._cum, u, side="right")
        which = np.minimum(which, len(self.components) - 1)
        out = np.empty((count, self.dim))
        for j, (_, spec) in enumerate(self.components):
            mask = which == j
            m = int(mask.sum())
            if m:
                out[mask] = spec.sample_at(gen, m)
        return out

    def region_prob(self, region):
        box = as_box(region, self.dim)
        return float(sum(w * spec.region_prob(box) for w, spec in self.components))

    def support_box(self):
        boxes = [spec.support_box() for _, spec in self.components]
        return Box(np.min([b.lo for b in boxes], axis=0),
                   np.max([b.hi for b in boxes], axis=0))

    def support_corners(self):
        return np.concatenate([spec.support_corners()
                               for _, spec in self.components], axis=0)

    def marginal(self, axis):
        return Mixture(tuple((w, spec.marginal(axis))
                             for w, spec in self.components))

    def label(self):
        return "mix(" + "+".join(f"{w:g}*{s.label()}"
                                 for w, s in self.components) + ")"

    def to_config(self):
        return {"kind": "mixture",
                "components": [{"weight": w, "distribution": s.to_config()}
                               for w, s in self.components]}


@dataclass(frozen=True, repr=False)
class ProductDistribution(DistributionSpec):
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ConfigurationError("product needs at least one factor")
        object.__setattr__(self, "factors", factors)
        offs = np.cumsum([0] + [f.dim for f in factors])
        object.__setattr__(self, "_offsets", offs)

    @property
    def dim(self):
        return int(self._offsets[-1])

    @property
    def is_continuous(self):
        return all(f.is_continuous for f in self.factors)

    @property
    def is_product(self):
        return all(f.is_product for f in self.factors)

    def sample_at(self, gen, count):
        return np.hstack([f.sample_at(gen, count) for f in self.factors])

    def region_prob(self, region):
        box = as_box(region, self.dim)
        p = 1.0
        for f, a, b in zip(self.factors, self._offsets, self._offsets[1:]):
            p *= f.region_prob(Box(box.lo[a:b], box.hi[a:b]))
        return float(p)

    def support_box(self):
        boxes = [f.support_box() for f in self.factors]
        return Box(np.concatenate([b.lo for b in boxes]),
                   np.concatenate([b.hi for b in boxes]))

    def support_corners(self):
        corner_sets = [f.support_corners() for f in self.factors]
        total = int(np.prod([c.shape[0] for c in corner_sets]))
        if total > 1 << 16:
            raise ConfigurationError("product support has too many extreme points")
        out = corner_sets[0]
        for c in corner_sets[1:]:
            out = np.hstack([np.repeat(out, c.shape[0], axis=0),
                             np.tile(c, (out.shape[0], 1))])
        return out

    def _locate(self, axis):
        f_idx = int(np.searchsorted(self._offsets, axis, side="right")) - 1
        return self.factors[f_idx], axis - int(self._offsets[f_idx])

    def marginal(self, axis):
        factor, local = self._locate(axis)
        return factor.marginal(local)

    def label(self):
        return "*".join(f.label() for f in self.factors)

    def to_config(self):
        return {"kind": "product",
                "factors": [f.to_config() for f in self.factors]}


_KINDS = {
    "uniform-box": lambda c: UniformBox(c["lo"], c["hi"]),
    "truncated-gaussian": lambda c: TruncatedGaussian(
        c["mean"], c["sigma"], c["lo"], c["hi"]),
    "finite-discrete": lambda c: FiniteDiscrete(c["points"], c["weights"]),
    "mixture": lambda c: Mixture(tuple(
        (comp["weight"], distribution_from_config(comp["distribution"]))
        for comp in c["components"])),
    "product": lambda c: ProductDistribution(tuple(
        distribution_from_config(f) for f in c["factors"])),
}


def distribution_from_config(config):
    """Build a DistributionSpec from a nested config record."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ConfigurationError("distribution config must be a record with a 'kind'")
    kind = config["kind"]
    if kind not in _KINDS:
        raise ConfigurationError(
            f"unknown distribution kind '{kind}' (known: {sorted(_KINDS)})")
    try:
        return _KINDS[kind](config)
    except KeyError as exc:
        raise ConfigurationError(
            f"distribution '{kind}' config is missing key {exc}") from None


@dataclass(frozen=True)
class SampleBatch:
    """A reproducible batch of i.i.d. draws."""

    points: np.ndarray = field(repr=False)
    seed: int
    count: int


def _workers():
    try:
        return max(1, int(os.environ.get("INFOLOSS_WORKERS", "1")))
    except ValueError:
        return 1


def sample(spec, count, seed):
    """Draw ``count`` i.i.d. points from ``spec``; bit-identical per (spec,
    count, seed). Chunks use disjoint Philox counter blocks, so the worker
    count never changes the result."""
    count = int(count)
    if count < 1:
        raise ConfigurationError("sample count must be >= 1")
    seed = int(seed)
    sizes = [(i, min(_CHUNK, count - i * _CHUNK))
             for i in range((count + _CHUNK - 1) // _CHUNK)]

    def draw(item):
        idx, m = item
        gen = np.random.Generator(
            np.random.Philox(key=seed & _MASK64, counter=idx << 128))
        return spec.sample_at(gen, m)

    w = _workers()
    if w > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(draw, sizes))
    else:
        parts = [draw(s) for s in sizes]
    points = parts[0] if len(parts) == 1 else np.vstack(parts)
    return SampleBatch(points=points, seed=seed, count=count)


def region_prob(spec, region):
    """Exact P(region) under ``spec`` for an axis-aligned box region."""
    return spec.region_prob(as_box(region, spec.dim))


def support_diameter(spec):
    """Largest Euclidean distance between two support points."""
    corners = spec.support_corners()
    if not np.all(np.isfinite(corners)):
        raise ConfigurationError("support is unbounded")
    if corners.shape[0] == 1:
        return 0.0
    d2 = np.sum((corners[:, None, :] - corners[None, :, :]) ** 2, axis=2)
    return float(np.sqrt(d2.max()))
