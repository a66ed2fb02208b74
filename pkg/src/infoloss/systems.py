"""Catalog of static deterministic maps with structural metadata.

Each system declares, besides its pointwise action, the structure the
analytic oracles and the exact conditioning mode need: the regions where the
map is constant (each with its output atom), and the invertible pieces
elsewhere (each with its output-image box and inverse). Constant regions are
finite unions of axis-aligned boxes so their masses come out of
``region_prob`` exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._kernels import floor_snap
from .errors import ConfigurationError
from .measure import Box, DistributionSpec

_INF = float("inf")


@dataclass(frozen=True)
class Atom:
    """Output point of positive mass and the input region mapped onto it."""

    y: np.ndarray
    region: Box

    def __post_init__(self):
        object.__setattr__(self, "y",
                           np.atleast_1d(np.asarray(self.y, dtype=np.float64)))


@dataclass(frozen=True)
class Piece:
    """One invertible branch: output image box (None = whole space) and the
    inverse map from output points back to input points."""

    image: Box | None
    inverse: callable
    label: str = ""

    def mask(self, y):
        if self.image is None:
            return np.ones(y.shape[0], dtype=bool)
        return self.image.contains(y)


class SystemSpec:
    """Base class of the static map catalog."""

    #: input/output dimension, or None when the map works in any dimension
    dim_in: int | None = None
    dim_out: int | None = None
    #: True when the map is globally injective (invertible postprocessing)
    is_injective = False

    def apply(self, points):
        """Map a (count, dim_in) batch to (count, dim_out)."""
        raise NotImplementedError

    def apply_point(self, x):
        return self.apply(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0]

    def atoms(self) -> tuple:
        return ()

    def pieces(self):
        """Invertible branches off the constant sets; None when the map has
        no declared piecewise-bijective structure."""
        return None

    @property
    def has_structure(self):
        return self.pieces() is not None

    def inverse_map(self, y):
        raise ConfigurationError(f"{self.label()} has no global inverse")

    def preimage_box(self, box: Box) -> Box:
        raise ConfigurationError(f"{self.label()} cannot pull back regions")

    def label(self) -> str:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return self.label()

    def _check_dim(self, points):
        if self.dim_in is not None and points.shape[1] != self.dim_in:
            raise ConfigurationError(
                f"{self.label()} expects dimension {self.dim_in}, "
                f"got {points.shape[1]}")


def _as_batch(points):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None] if pts.size == 1 else pts[None, :]
    return pts


@dataclass(frozen=True, repr=False)
class Identity(SystemSpec):
    is_injective = True

    def apply(self, points):
        return _as_batch(points).copy()

    def pieces(self):
        return (Piece(None, lambda y: y, "id"),)

    def inverse_map(self, y):
        return y

    def preimage_box(self, box):
        return box

    def label(self):
        return "identity"

    def to_config(self):
        return {"kind": "identity"}


@dataclass(frozen=True, repr=False)
class Affine(SystemSpec):
    scale: float
    offset: float = 0.0
    is_injective = True

    def __post_init__(self):
        if self.scale == 0:
            raise ConfigurationError("affine needs scale != 0")

    def apply(self, points):
        return self.scale * _as_batch(points) + self.offset

    def pieces(self):
        return (Piece(None, self.inverse_map, "affine"),)

    def inverse_map(self, y):
        return (y - self.offset) / self.scale

    def preimage_box(self, box):
        a, b = (box.lo - self.offset) / self.scale, (box.hi - self.offset) / self.scale
        return Box(np.minimum(a, b), np.maximum(a, b))

    def _image_box(self, box):
        if box is None:
            return None
        a, b = self.scale * box.lo + self.offset, self.scale * box.hi + self.offset
        return Box(np.minimum(a, b), np.maximum(a, b))

    def label(self):
        return f"affine({self.scale:g}x{self.offset:+g})"

    def to_config(self):
        return {"kind": "affine", "scale": self.scale, "offset": self.offset}


@dataclass(frozen=True, repr=False)
class CenterClipper(SystemSpec):
    """y = x for |x| > c, else 0; the canonical mixed-output map."""

    c: float
    dim_in = 1
    dim_out = 1

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigurationError("center-clipper needs c > 0")

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        return np.where(np.abs(pts) > self.c, pts, 0.0)

    def atoms(self):
        return (Atom(np.array([0.0]), Box([-self.c], [self.c])),)

    def pieces(self):
        return (Piece(Box([-_INF], [-self.c]), lambda y: y, "neg"),
                Piece(Box([self.c], [_INF]), lambda y: y, "pos"))

    def label(self):
        return f"center-clipper({self.c:g})"

    def to_config(self):
        return {"kind": "center-clipper", "c": self.c}


@dataclass(frozen=True, repr=False)
class MagnitudeClipper(SystemSpec):
    """y = |x| for |x| > c, else 0. Like the center clipper but also destroys
    the sign outside the clipping interval, so reconstruction error strictly
    exceeds the relative loss."""

    c: float
    dim_in = 1
    dim_out = 1

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigurationError("magnitude-clipper needs c > 0")

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        return np.where(np.abs(pts) > self.c, np.abs(pts), 0.0)

    def atoms(self):
        return (Atom(np.array([0.0]), Box([-self.c], [self.c])),)

    def pieces(self):
        return (Piece(Box([self.c], [_INF]), lambda y: -y, "neg"),
                Piece(Box([self.c], [_INF]), lambda y: y, "pos"))

    def label(self):
        return f"magnitude-clipper({self.c:g})"

    def to_config(self):
        return {"kind": "magnitude-clipper", "c": self.c}


@dataclass(frozen=True, repr=False)
class UniformQuantizer(SystemSpec):
    """levels equal cells over [lo, hi], each mapped to its midpoint; cell
    boundaries tie upward. Constant everywhere, so no invertible pieces."""

    levels: int
    lo: float
    hi: float
    dim_in = 1
    dim_out = 1

    def __post_init__(self):
        if self.levels < 2:
            raise ConfigurationError("uniform-quantizer needs levels >= 2")
        if not self.hi > self.lo:
            raise ConfigurationError("uniform-quantizer needs hi > lo")

    @property
    def _width(self):
        return (self.hi - self.lo) / self.levels

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        idx = floor_snap((pts - self.lo) / self._width)
        idx = np.clip(idx, 0, self.levels - 1)
        return self.lo + (idx + 0.5) * self._width

    def atoms(self):
        w = self._width
        return tuple(
            Atom(np.array([self.lo + (i + 0.5) * w]),
                 Box([self.lo + i * w], [self.lo + (i + 1) * w]))
            for i in range(self.levels))

    def pieces(self):
        return ()

    def label(self):
        return f"uniform-quantizer({self.levels},{self.lo:g},{self.hi:g})"

    def to_config(self):
        return {"kind": "uniform-quantizer", "levels": self.levels,
                "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, repr=False)
class Square(SystemSpec):
    """y = x^2: 2-to-1 off zero, the finite-loss reference map."""

    dim_in = 1
    dim_out = 1

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        return pts * pts

    def pieces(self):
        img = Box([0.0], [_INF])
        return (Piece(img, lambda y: -np.sqrt(np.maximum(y, 0.0)), "neg"),
                Piece(img, lambda y: np.sqrt(np.maximum(y, 0.0)), "pos"))

    def label(self):
        return "square"

    def to_config(self):
        return {"kind": "square"}


@dataclass(frozen=True, repr=False)
class Magnitude(SystemSpec):
    """y = |x|: 2-to-1, finite loss."""

    dim_in = 1
    dim_out = 1

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        return np.abs(pts)

    def pieces(self):
        img = Box([0.0], [_INF])
        return (Piece(img, lambda y: -y, "neg"),
                Piece(img, lambda y: y, "pos"))

    def label(self):
        return "magnitude"

    def to_config(self):
        return {"kind": "magnitude"}


@dataclass(frozen=True, repr=False)
class CoordinateProjection(SystemSpec):
    """Keeps a subset of axes. Preimages are continua, so no atom/piece
    structure is declared; use the generic two-sided estimator mode."""

    keep: tuple
    dim_in: int

    def __post_init__(self):
        keep = tuple(int(i) for i in self.keep)
        if len(keep) == 0 or len(set(keep)) != len(keep):
            raise ConfigurationError("projection needs distinct kept axes")
        if any(i < 0 or i >= self.dim_in for i in keep):
            raise ConfigurationError("projection axis out of range")
        object.__setattr__(self, "keep", keep)
        object.__setattr__(self, "dim_out", len(keep))

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        return pts[:, list(self.keep)].copy()

    def label(self):
        return f"projection{list(self.keep)}"

    def to_config(self):
        return {"kind": "coordinate-projection", "keep": list(self.keep),
                "dim_in": self.dim_in}


@dataclass(frozen=True, repr=False)
class Componentwise(SystemSpec):
    """Applies one scalar catalog map per axis."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ConfigurationError("componentwise needs at least one part")
        for p in parts:
            if not ((p.dim_in in (1, None)) and (p.dim_out in (1, None))):
                raise ConfigurationError(
                    "componentwise parts must be scalar maps")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "dim_in", len(parts))
        object.__setattr__(self, "dim_out", len(parts))

    @property
    def is_injective(self):
        return all(p.is_injective for p in self.parts)

    def apply(self, points):
        pts = _as_batch(points)
        self._check_dim(pts)
        cols = [p.apply(pts[:, i:i + 1]) for i, p in enumerate(self.parts)]
        return np.hstack(cols)

    def atoms(self):
        # joint atoms of the output law: one per combination of per-axis atoms
        per_axis = [p.atoms() for p in self.parts]
        if any(len(a) == 0 for a in per_axis):
            return ()
        out = []
        for combo in itertools.product(*per_axis):
            y = np.concatenate([a.y for a in combo])
            region = Box(np.concatenate([a.region.lo for a in combo]),
                         np.concatenate([a.region.hi for a in combo]))
            out.append(Atom(y, region))
        return tuple(out)

    def pieces(self):
        return None  # conditioning works per axis; see entropy.structure_keys

    @property
    def has_structure(self):
        return all(p.has_structure for p in self.parts)

    def label(self):
        return "(" + " x ".join(p.label() for p in self.parts) + ")"

    def to_config(self):
        return {"kind": "componentwise",
                "parts": [p.to_config() for p in self.parts]}


@dataclass(frozen=True, repr=False)
class Composition(SystemSpec):
    """outer(inner(x)). Structure is propagated when one side is globally
    injective; otherwise the composition is left unstructured."""

    inner: SystemSpec
    outer: SystemSpec

    def __post_init__(self):
        din, dout = self.inner.dim_out, self.outer.dim_in
        if din is not None and dout is not None and din != dout:
            raise ConfigurationError(
                f"composition dimensions do not chain: {din} -> {dout}")
        object.__setattr__(self, "dim_in", self.inner.dim_in)
        object.__setattr__(self, "dim_out",
                           self.outer.dim_out if self.outer.dim_out is not None
                           else self.inner.dim_out)

    @property
    def is_injective(self):
        return self.inner.is_injective and self.outer.is_injective

    def apply(self, points):
        return self.outer.apply(self.inner.apply(_as_batch(points)))

    def atoms(self):
        if self.outer.is_injective and self.inner.has_structure:
            return tuple(Atom(self.outer.apply_point(a.y), a.region)
                         for a in self.inner.atoms())
        if self.inner.is_injective and self.outer.has_structure:
            return tuple(Atom(a.y, self.inner.preimage_box(a.region))
                         for a in self.outer.atoms())
        return ()

    def pieces(self):
        if self.outer.is_injective and self.inner.has_structure:
            out = []
            for p in self.inner.pieces():
                image = (self.outer._image_box(p.image)
                         if isinstance(self.outer, Affine) else p.image)
                inv = (lambda y, _p=p: _p.inverse(self.outer.inverse_map(y)))
                out.append(Piece(image, inv, p.label))
            return tuple(out)
        if self.inner.is_injective and self.outer.has_structure:
            return tuple(
                Piece(p.image,
                      (lambda y, _p=p: self.inner.inverse_map(_p.inverse(y))),
                      p.label)
                for p in self.outer.pieces())
        return None

    def inverse_map(self, y):
        if not self.is_injective:
            raise ConfigurationError(f"{self.label()} has no global inverse")
        return self.inner.inverse_map(self.outer.inverse_map(y))

    def preimage_box(self, box):
        if not self.is_injective:
            raise ConfigurationError(f"{self.label()} cannot pull back regions")
        return self.inner.preimage_box(self.outer.preimage_box(box))

    def label(self):
        return f"{self.outer.label()} . {self.inner.label()}"

    def to_config(self):
        return {"kind": "composition", "inner": self.inner.to_config(),
                "outer": self.outer.to_config()}


@dataclass(frozen=True)
class AtomEntry:
    y: np.ndarray
    region: Box
    mass: float


@dataclass(frozen=True)
class AtomTable:
    """Atomic part of the output law: (output point, source region, mass)."""

    entries: tuple = field(default=())

    @property
    def total_mass(self):
        return float(sum(e.mass for e in self.entries))

    def __len__(self):
        return len(self.entries)


def atom_table(system: SystemSpec, dist: DistributionSpec) -> AtomTable:
    """Atoms of the output law under ``dist``; zero-mass atoms are dropped."""
    entries = []
    for a in system.atoms():
        mass = dist.region_prob(a.region)
        if mass > 0:
            entries.append(AtomEntry(a.y, a.region, mass))
    table = AtomTable(tuple(entries))
    if table.total_mass > 1 + 1e-9:
        raise ConfigurationError("atom masses exceed 1; overlapping regions?")
    return table


def analytic_relative_loss(system: SystemSpec, dist: DistributionSpec):
    """Exact relative loss when the hypotheses hold, else None.

    For maps constant on positive-mass box regions and invertible elsewhere,
    the loss is the total constant-region mass. Componentwise maps on product
    laws average the per-axis losses; an injective outer factor in a
    composition never changes the loss. ``None`` means "no closed form here",
    never a silent guess.
    """
    if not dist.is_continuous:
        return None
    if isinstance(system, Componentwise):
        if dist.dim != system.dim_in or not dist.is_product:
            return None
        vals = [analytic_relative_loss(p, dist.marginal(i))
                for i, p in enumerate(system.parts)]
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))
    if isinstance(system, Composition):
        if system.outer.is_injective:
            return analytic_relative_loss(system.inner, dist)
        if isinstance(system.inner, Identity):
            return analytic_relative_loss(system.outer, dist)
        return None
    pieces = system.pieces()
    if pieces is None:
        return None
    if system.dim_in not in (None, dist.dim):
        return None
    total = atom_table(system, dist).total_mass
    if len(pieces) == 0 and total < 1 - 1e-9:
        # constant-everywhere map whose declared cells miss support mass:
        # the closed form would be wrong, so refuse
        return None
    return min(total, 1.0)


_SYSTEM_KINDS = {
    "identity": lambda c: Identity(),
    "affine": lambda c: Affine(c["scale"], c.get("offset", 0.0)),
    "center-clipper": lambda c: CenterClipper(c["c"]),
    "magnitude-clipper": lambda c: MagnitudeClipper(c["c"]),
    "uniform-quantizer": lambda c: UniformQuantizer(c["levels"], c["lo"], c["hi"]),
    "square": lambda c: Square(),
    "magnitude": lambda c: Magnitude(),
    "coordinate-projection": lambda c: CoordinateProjection(
        tuple(c["keep"]), c["dim_in"]),
    "componentwise": lambda c: Componentwise(
        tuple(system_from_config(p) for p in c["parts"])),
    "composition": lambda c: Composition(system_from_config(c["inner"]),
                                         system_from_config(c["outer"])),
}


def system_from_config(config):
    """Build a SystemSpec from a nested config record."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ConfigurationError("system config must be a record with a 'kind'")
    kind = config["kind"]
    if kind not in _SYSTEM_KINDS:
        raise ConfigurationError(
            f"unknown system kind '{kind}' (known: {sorted(_SYSTEM_KINDS)})")
    try:
        return _SYSTEM_KINDS[kind](config)
    except KeyError as exc:
        raise ConfigurationError(
            f"system '{kind}' config is missing key {exc}") from None
