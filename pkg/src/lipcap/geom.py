"""Planar geometry: dyadic squares, annuli, scenes and quadtree rasterization.

A raster is stored sparsely as the sorted array of occupied leaf indices
``(i, j)`` relative to a root dyadic square.  The quadtree is implicit: the
ancestor of leaf ``(i, j)`` at relative level ``l`` is ``(i >> (N - l), j >> (N - l))``,
so an internal node exists exactly when one of its descendants is occupied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .config import default_depth_cap
from .errors import DepthTooLarge, ObstaclesOverlap, ShapeOutsideRoot


@dataclass(frozen=True, order=True)
class DyadicSquare:
    """Closed square [m 2^-n, (m+1) 2^-n] x [r 2^-n, (r+1) 2^-n]."""

    m: int
    r: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"dyadic level must be >= 0, got {self.n}")

    @property
    def side(self) -> float:
        return 2.0 ** -self.n

    @property
    def x0(self) -> float:
        return self.m * self.side

    @property
    def y0(self) -> float:
        return self.r * self.side

    @property
    def center(self) -> tuple[float, float]:
        return ((self.m + 0.5) * self.side, (self.r + 0.5) * self.side)

    def bounds(self, scale: float = 1.0) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the concentric square with `scale` times the side."""
        cx, cy = self.center
        half = 0.5 * scale * self.side
        return (cx - half, cx + half, cy - half, cy + half)

    def children(self) -> list["DyadicSquare"]:
        m, r, n = 2 * self.m, 2 * self.r, self.n + 1
        return [DyadicSquare(m, r, n), DyadicSquare(m + 1, r, n),
                DyadicSquare(m, r + 1, n), DyadicSquare(m + 1, r + 1, n)]

    def parent(self) -> "DyadicSquare":
        return DyadicSquare(self.m >> 1, self.r >> 1, self.n - 1)

    def contains(self, other: "DyadicSquare") -> bool:
        if other.n < self.n:
            return False
        shift = other.n - self.n
        return (other.m >> shift) == self.m and (other.r >> shift) == self.r

    def neighbors(self) -> list["DyadicSquare"]:
        """The 9 same-size dyadic squares meeting this one (itself included)."""
        return [DyadicSquare(self.m + dm, self.r + dr, self.n)
                for dm in (-1, 0, 1) for dr in (-1, 0, 1)]

    def to_dict(self) -> dict:
        return {"m": self.m, "r": self.r, "n": self.n}


UNIT_ROOT = DyadicSquare(0, 0, 0)


@dataclass(frozen=True)
class Annulus:
    """Closed annulus 2^{-n-1} <= |z - center| <= 2^{-n}."""

    center: complex
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("annulus index must be nonnegative")

    @property
    def outer(self) -> float:
        return 2.0 ** -self.index

    @property
    def inner(self) -> float:
        return 2.0 ** (-self.index - 1)

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        d = np.abs(np.asarray(pts, dtype=complex) - self.center)
        return (d >= self.inner) & (d <= self.outer)


# -- shapes -----------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    start: tuple[float, float]
    end: tuple[float, float]


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class DyadicShape:
    m: int
    r: int
    n: int


@dataclass(frozen=True)
class Bitmap:
    n: int
    cells: tuple[tuple[int, int], ...]


Shape = Union[Segment, Disc, DyadicShape, Bitmap]


@dataclass(frozen=True)
class ParametricDomain:
    """Slit or road-runner domain with obstacles centred at a_n = a0 q^n, radius r_n = c0 p^n, n >= 1.

    Obstacles lie on the positive real axis and accumulate at the boundary point 0.
    """

    kind: str
    a0: float
    q: float
    c0: float
    p: float
    radius: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("slit", "roadrunner"):
            raise ValueError(f"unknown parametric kind {self.kind!r}")
        if not (0 < self.q < 1 and 0 < self.p < 1):
            raise ValueError("need 0 < q < 1 and 0 < p < 1")
        if self.a0 <= 0 or self.c0 <= 0:
            raise ValueError("a0 and c0 must be positive")
        # numeric check on the first 64 gaps
        n = np.arange(1, 65)
        a, r = self.centers(n), self.radii(n)
        if np.any(a[1:] + r[1:] >= a[:-1] - r[:-1]):
            raise ObstaclesOverlap("obstacles overlap within the first 64 indices")
        # closed form: r_n + r_{n+1} < a_n - a_{n+1} for all n >= 1; the ratio
        # r_n / a_n is nonincreasing when p <= q, so n = 1 decides it.
        if self.p > self.q:
            raise ObstaclesOverlap("p > q: r_n / a_n grows without bound, obstacles eventually overlap")
        if not self.c0 * self.p * (1 + self.p) < self.a0 * self.q * (1 - self.q):
            raise ObstaclesOverlap("c0 p (1 + p) >= a0 q (1 - q)")

    def centers(self, n) -> np.ndarray:
        return self.a0 * self.q ** np.asarray(n, dtype=float)

    def radii(self, n) -> np.ndarray:
        return self.c0 * self.p ** np.asarray(n, dtype=float)

    @property
    def enclosing_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        return float(self.centers(1) + self.radii(1))

    def obstacle(self, n: int) -> Shape:
        a, r = float(self.centers(n)), float(self.radii(n))
        if self.kind == "slit":
            return Segment((a - r, 0.0), (a + r, 0.0))
        return Disc((a, 0.0), r)

    def last_resolved(self, leaf: float) -> int:
        """Largest n with r_n >= leaf (0 when even r_1 is below leaf scale)."""
        if self.radii(1) < leaf:
            return 0
        return int(math.floor(math.log(leaf / self.c0) / math.log(self.p)))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "a0": self.a0, "q": self.q, "c0": self.c0, "p": self.p}
        if self.radius is not None:
            d["radius"] = self.radius
        return d


@dataclass(frozen=True)
class Scene:
    root: DyadicSquare = UNIT_ROOT
    shapes: tuple = ()
    parametric: Optional[ParametricDomain] = None
    b: tuple[float, float] = (0.0, 0.0)

    def with_shapes(self, *more: Shape) -> "Scene":
        return Scene(self.root, tuple(self.shapes) + tuple(more), self.parametric, self.b)


# -- rasters ----------------------------------------------------------------

def _keys(cells: np.ndarray, depth: int) -> np.ndarray:
    return (cells[:, 0].astype(np.int64) << depth) | cells[:, 1].astype(np.int64)


@dataclass(frozen=True, eq=False)
class RasterSet:
    """Union of occupied closed leaf squares at relative depth `depth` below `root`."""

    root: DyadicSquare
    depth: int
    cells: np.ndarray = field(repr=False)

    @classmethod
    def from_cells(cls, root: DyadicSquare, depth: int, cells) -> "RasterSet":
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        size = 1 << depth
        if cells.size and (cells.min() < 0 or cells.max() >= size):
            raise ShapeOutsideRoot("cell index outside the root square")
        if len(cells):
            keys = np.unique(_keys(cells, depth))
            cells = np.stack([keys >> depth, keys & (size - 1)], axis=1)
        cells.setflags(write=False)
        return cls(root, depth, cells)

    @classmethod
    def empty(cls, root: DyadicSquare = UNIT_ROOT, depth: int = 1) -> "RasterSet":
        return cls.from_cells(root, depth, np.zeros((0, 2), dtype=np.int64))

    @classmethod
    def full(cls, root: DyadicSquare = UNIT_ROOT, depth: int = 1) -> "RasterSet":
        size = 1 << depth
        i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        return cls.from_cells(root, depth, np.stack([i.ravel(), j.ravel()], axis=1))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def is_empty(self) -> bool:
        return len(self.cells) == 0

    @property
    def size(self) -> int:
        return 1 << self.depth

    @property
    def leaf_side(self) -> float:
        return self.root.side * 2.0 ** -self.depth

    @property
    def leaf_level(self) -> int:
        return self.root.n + self.depth

    def keys(self) -> np.ndarray:
        return _keys(self.cells, self.depth)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterSet):
            return NotImplemented
        return (self.root == other.root and self.depth == other.depth
                and np.array_equal(self.cells, other.cells))

    def _check_compatible(self, other: "RasterSet"):
        if self.root != other.root or self.depth != other.depth:
            raise ValueError("rasters must share root and depth")

    def union(self, other: "RasterSet") -> "RasterSet":
        self._check_compatible(other)
        return RasterSet.from_cells(self.root, self.depth, np.concatenate([self.cells, other.cells]))

    def intersection(self, other: "RasterSet") -> "RasterSet":
        self._check_compatible(other)
        keep = np.isin(self.keys(), other.keys())
        return RasterSet.from_cells(self.root, self.depth, self.cells[keep])

    def issubset(self, other: "RasterSet") -> bool:
        self._check_compatible(other)
        return bool(np.all(np.isin(self.keys(), other.keys())))

    def select(self, mask: np.ndarray) -> "RasterSet":
        return RasterSet.from_cells(self.root, self.depth, self.cells[np.asarray(mask, bool)])

    def level_nodes(self, level: int) -> np.ndarray:
        """Unique occupied nodes (i, j) at relative `level` (0 = root, depth = leaves)."""
        shift = self.depth - level
        if not len(self.cells):
            return np.zeros((0, 2), dtype=np.int64)
        keys = np.unique(((self.cells[:, 0] >> shift) << level) | (self.cells[:, 1] >> shift))
        return np.stack([keys >> level, keys & ((1 << level) - 1)], axis=1)

    def coarsen(self, depth: int) -> "RasterSet":
        if depth > self.depth:
            raise ValueError("can only coarsen to a smaller depth")
        return RasterSet.from_cells(self.root, depth, self.level_nodes(depth))

    def half_scale(self) -> "RasterSet":
        """Image under z -> x0 + (z - x0)/2 about the root's lower-left corner."""
        return RasterSet.from_cells(self.root, self.depth + 1, self.cells)

    def leaf_bounds(self):
        """Absolute (x0, y0) lower-left corners of occupied leaves and the leaf side."""
        h = self.leaf_side
        return self.root.x0 + self.cells[:, 0] * h, self.root.y0 + self.cells[:, 1] * h, h

    def leaf_centers(self) -> np.ndarray:
        x0, y0, h = self.leaf_bounds()
        return (x0 + 0.5 * h) + 1j * (y0 + 0.5 * h)

    def maximal_blocks(self) -> list[DyadicSquare]:
        """Largest dyadic squares all of whose leaves are occupied (a disjoint cover)."""
        out = []
        covered = np.zeros(0, dtype=np.int64)
        for level in range(self.depth + 1):
            if level:
                covered = _child_keys(covered, level)
            shift = self.depth - level
            pk = ((self.cells[:, 0] >> shift) << level) | (self.cells[:, 1] >> shift)
            keys, counts = np.unique(pk, return_counts=True)
            full = keys[counts == (1 << (2 * shift))]
            new = full[~np.isin(full, covered)]
            for k in new:
                i, j = int(k) >> level, int(k) & ((1 << level) - 1)
                out.append(DyadicSquare((self.root.m << level) + i, (self.root.r << level) + j,
                                        self.root.n + level))
            covered = np.concatenate([covered, new])
        return out

    def leaf_squares(self) -> list[DyadicSquare]:
        ox, oy = self.root.m << self.depth, self.root.r << self.depth
        return [DyadicSquare(int(ox + i), int(oy + j), self.leaf_level) for i, j in self.cells]


def _child_keys(keys: np.ndarray, level: int) -> np.ndarray:
    """Keys at `level` of the four children of each node key at `level - 1`."""
    if not len(keys):
        return keys
    i, j = keys >> (level - 1), keys & ((1 << (level - 1)) - 1)
    return np.concatenate([((2 * i + di) << level) | (2 * j + dj) for di in (0, 1) for dj in (0, 1)])


# -- rasterization ----------------------------------------------------------

def _expand_ranges(cols, lo, hi):
    """Cells (col, j) for j in [lo, hi] per column; empty ranges are dropped."""
    ok = hi >= lo
    cols, lo, hi = cols[ok], lo[ok], hi[ok]
    counts = (hi - lo + 1).astype(np.int64)
    if counts.sum() == 0:
        return np.zeros((0, 2), dtype=np.int64)
    i = np.repeat(cols, counts)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    j = starts + np.arange(counts.sum())
    return np.stack([i, j], axis=1).astype(np.int64)


def _segment_cells(p, q, size):
    (x1, y1), (x2, y2) = sorted([tuple(p), tuple(q)])
    i_lo = max(0, math.ceil(x1) - 1)
    i_hi = min(size - 1, math.floor(x2))
    if i_hi < i_lo:
        return np.zeros((0, 2), dtype=np.int64)
    cols = np.arange(i_lo, i_hi + 1)
    if x2 == x1:
        lo = np.full(cols.shape, min(y1, y2))
        hi = np.full(cols.shape, max(y1, y2))
    else:
        slope = (y2 - y1) / (x2 - x1)
        xa = np.clip(cols, x1, x2)
        xb = np.clip(cols + 1, x1, x2)
        ya = y1 + (xa - x1) * slope
        yb = y1 + (xb - x1) * slope
        ya[xa == x2] = y2
        yb[xb == x2] = y2
        lo, hi = np.minimum(ya, yb), np.maximum(ya, yb)
    j_lo = np.maximum(0, np.ceil(lo).astype(np.int64) - 1)
    j_hi = np.minimum(size - 1, np.floor(hi).astype(np.int64))
    return _expand_ranges(cols, j_lo, j_hi)


def _disc_cells(c, rad, size, inner):
    cx, cy = c
    i_lo = max(0, math.ceil(cx - rad) - 1)
    i_hi = min(size - 1, math.floor(cx + rad))
    if i_hi < i_lo:
        return np.zeros((0, 2), dtype=np.int64)
    cols = np.arange(i_lo, i_hi + 1)
    if inner:
        dx = np.maximum(np.abs(cols - cx), np.abs(cols + 1 - cx))
        ok = dx <= rad
        half = np.sqrt(np.maximum(rad * rad - dx * dx, 0.0))
        j_lo = np.maximum(0, np.ceil(cy - half).astype(np.int64))
        j_hi = np.minimum(size - 1, np.floor(cy + half).astype(np.int64) - 1)
    else:
        dx = np.maximum(np.maximum(cols - cx, cx - (cols + 1)), 0.0)
        ok = dx <= rad
        half = np.sqrt(np.maximum(rad * rad - dx * dx, 0.0))
        j_lo = np.maximum(0, np.ceil(cy - half).astype(np.int64) - 1)
        j_hi = np.minimum(size - 1, np.floor(cy + half).astype(np.int64))
    j_hi = np.where(ok, j_hi, j_lo - 1)
    return _expand_ranges(cols, j_lo, j_hi)


def _dyadic_cells(m, r, n, root, depth, inner):
    leaf_level = root.n + depth
    size = 1 << depth
    if n <= leaf_level:
        k = leaf_level - n
        i0 = (m << k) - (root.m << depth)
        j0 = (r << k) - (root.r << depth)
        w = 1 << k
        i, j = np.meshgrid(np.arange(i0, i0 + w), np.arange(j0, j0 + w), indexing="ij")
        cells = np.stack([i.ravel(), j.ravel()], axis=1)
    else:
        if inner:
            return np.zeros((0, 2), dtype=np.int64), True
        k = n - leaf_level
        cells = np.array([[(m >> k) - (root.m << depth), (r >> k) - (root.r << depth)]])
    ok = (cells >= 0).all(axis=1) & (cells < size).all(axis=1)
    return cells[ok], bool(ok.all())


def _to_leaf_units(pt, root, depth):
    scale = (1 << depth) / root.side
    return ((pt[0] - root.x0) * scale, (pt[1] - root.y0) * scale)


def rasterize(scene: Scene, depth: int, inner: bool = False, clip: bool = False,
              depth_cap: Optional[int] = None) -> RasterSet:
    """Quadtree raster of the scene's shapes.

    Outer mode (default) marks every closed leaf meeting a shape, so contents
    computed from it are upper bounds; ``inner=True`` marks only leaves contained
    in a single shape.  Dyadic and bitmap shapes map onto their own leaf blocks.
    With ``clip=True`` shapes may extend past the root and are cut to it.
    """
    cap = default_depth_cap() if depth_cap is None else depth_cap
    if depth < 1 or depth > cap:
        raise DepthTooLarge(f"depth {depth} outside [1, {cap}]")
    root, size = scene.root, 1 << depth
    parts = [np.zeros((0, 2), dtype=np.int64)]

    def inside(xs, ys):
        return min(xs) >= 0 and max(xs) <= size and min(ys) >= 0 and max(ys) <= size

    for shape in scene.shapes:
        if isinstance(shape, Segment):
            p = _to_leaf_units(shape.start, root, depth)
            q = _to_leaf_units(shape.end, root, depth)
            if not clip and not inside((p[0], q[0]), (p[1], q[1])):
                raise ShapeOutsideRoot(f"{shape} leaves the root square")
            if not inner:
                parts.append(_segment_cells(p, q, size))
        elif isinstance(shape, Disc):
            c = _to_leaf_units(shape.center, root, depth)
            rad = shape.radius * size / root.side
            if not clip and not inside((c[0] - rad, c[0] + rad), (c[1] - rad, c[1] + rad)):
                raise ShapeOutsideRoot(f"{shape} leaves the root square")
            parts.append(_disc_cells(c, rad, size, inner))
        elif isinstance(shape, (DyadicShape, Bitmap)):
            squares = ([(shape.m, shape.r, shape.n)] if isinstance(shape, DyadicShape)
                       else [(m, r, shape.n) for m, r in shape.cells])
            for m, r, n in squares:
                cells, whole = _dyadic_cells(m, r, n, root, depth, inner)
                if not whole and not clip:
                    raise ShapeOutsideRoot(f"dyadic square {(m, r, n)} leaves the root square")
                parts.append(cells)
        else:
            raise TypeError(f"unknown shape {shape!r}")
    return RasterSet.from_cells(root, depth, np.concatenate(parts))


def _square_distance_ranges(raster: RasterSet, b: complex):
    x0, y0, h = raster.leaf_bounds()
    bx, by = b.real, b.imag
    dx = np.maximum(np.maximum(x0 - bx, bx - (x0 + h)), 0.0)
    dy = np.maximum(np.maximum(y0 - by, by - (y0 + h)), 0.0)
    fx = np.maximum(np.abs(x0 - bx), np.abs(x0 + h - bx))
    fy = np.maximum(np.abs(y0 - by), np.abs(y0 + h - by))
    return dx * dx + dy * dy, fx * fx + fy * fy


def annulus_clip(raster: RasterSet, ann: Annulus) -> RasterSet:
    """Leaves of `raster` meeting the closed annulus."""
    if raster.is_empty:
        return raster
    dmin2, dmax2 = _square_distance_ranges(raster, complex(ann.center))
    return raster.select((dmin2 <= ann.outer ** 2) & (dmax2 >= ann.inner ** 2))


def ball_clip(raster: RasterSet, b: complex, radius: float) -> RasterSet:
    if raster.is_empty:
        return raster
    dmin2, _ = _square_distance_ranges(raster, complex(b))
    return raster.select(dmin2 <= radius * radius)


def parametric_obstacles(domain: ParametricDomain, leaf: float, root: DyadicSquare = UNIT_ROOT):
    """Obstacle shapes resolved at leaf scale that can meet `root`, and the truncation index.

    The truncation index is the first n whose radius falls below `leaf`; obstacles
    from there on are left to the symbolic tail.
    """
    last = domain.last_resolved(leaf)
    xmin, xmax = root.x0, root.x0 + root.side
    shapes = []
    for n in range(1, last + 1):
        a, r = float(domain.centers(n)), float(domain.radii(n))
        if a + r < xmin:
            break
        if a - r <= xmax:
            shapes.append(domain.obstacle(n))
    return shapes, last + 1


def complement_in_ball(domain, radius: Optional[float] = None, depth: int = 8,
                       root: Optional[DyadicSquare] = None, b: Optional[complex] = None):
    """Raster of the obstacle set (ball minus U) inside the closed ball B(b, radius).

    Returns ``(raster, truncation)``.  For a Scene the shapes are the obstacles and
    ``truncation`` is None; for a ParametricDomain, b = 0 and obstacles below
    leaf scale are dropped.  Parts of road-runner discs below the real axis fall
    outside the unit root and are clipped away.
    """
    if isinstance(domain, Scene):
        root = domain.root if root is None else root
        b = complex(*domain.b) if b is None else complex(b)
        scene = Scene(root, domain.shapes)
        raster = rasterize(scene, depth, clip=True)
        if radius is not None:
            raster = ball_clip(raster, b, radius)
        return raster, None
    if isinstance(domain, ParametricDomain):
        root = UNIT_ROOT if root is None else root
        leaf = root.side * 2.0 ** -depth
        radius = domain.enclosing_radius if radius is None else radius
        shapes, trunc = parametric_obstacles(domain, leaf, root)
        raster = rasterize(Scene(root, tuple(shapes)), depth, clip=True)
        return ball_clip(raster, 0j, radius), trunc
    raise TypeError(f"unsupported domain {domain!r}")
