"""Discrete measures and the dyadic Frostman construction.

The sweep puts an atom of weight h(leaf side) at every occupied leaf centre, then
walks the quadtree from the level above the leaves up to the root, scaling each
square whose mass exceeds h(side) down to exactly h(side).  After the sweep
every dyadic square S carries mass <= h(side S), and the maximal saturated
squares form a cover, so the total mass equals the dyadic h-content.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .content import Ladder, PowerLaw, check_beta
from .errors import EmptySet
from .geom import RasterSet

BALL_SAFETY = 8.0


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape != w.shape:
            raise ValueError("points and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls) -> "DiscreteMeasure":
        return cls(np.zeros(0, complex), np.zeros(0))

    @classmethod
    def delta(cls, at: complex = 0j, weight: float = 1.0) -> "DiscreteMeasure":
        return cls(np.array([at]), np.array([weight]))

    def __len__(self):
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(np.concatenate([self.points, other.points]),
                               np.concatenate([self.weights, other.weights]))

    def __mul__(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights * float(c))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)

    def restrict(self, mask) -> "DiscreteMeasure":
        mask = np.asarray(mask, bool)
        return DiscreteMeasure(self.points[mask], self.weights[mask])

    def reweight(self, factors) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights * np.asarray(factors, dtype=float))

    def dilate(self, r: float) -> "DiscreteMeasure":
        """The distribution f o A for A(z) = r z: atoms move to p / r, weights scale by r^-2."""
        return DiscreteMeasure(self.points / r, self.weights / (r * r))

    def to_dict(self) -> dict:
        return {"atoms": [[float(p.real), float(p.imag), float(w)]
                          for p, w in zip(self.points, self.weights)]}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteMeasure":
        atoms = np.asarray(d.get("atoms", []), dtype=float).reshape(-1, 3)
        return cls(atoms[:, 0] + 1j * atoms[:, 1], atoms[:, 2])


@dataclass
class SweepResult:
    weights: np.ndarray          # per occupied leaf, pre-division
    node_mass: list              # per relative level (root first): masses of occupied nodes
    node_cap: list               # per relative level: h(side)
    node_of_leaf: list           # per relative level: index of each leaf's ancestor node


def frostman_sweep(raster: RasterSet, h) -> SweepResult:
    if raster.is_empty:
        raise EmptySet("Frostman measure needs a nonempty set")
    N, side = raster.depth, raster.root.side
    w = np.full(len(raster), float(h(side * 2.0 ** -N)))
    node_of_leaf = [None] * (N + 1)
    node_of_leaf[N] = np.arange(len(raster))
    for level in range(N - 1, -1, -1):
        shift = N - level
        keys = ((raster.cells[:, 0] >> shift) << level) | (raster.cells[:, 1] >> shift)
        _, inv = np.unique(keys, return_inverse=True)
        node_of_leaf[level] = inv
        mass = np.bincount(inv, weights=w)
        cap = float(h(side * 2.0 ** -level))
        over = mass > cap
        factor = np.ones_like(mass)
        factor[over] = cap / mass[over]
        w = w * factor[inv]
    masses = [np.bincount(node_of_leaf[l], weights=w) for l in range(N + 1)]
    caps = [float(h(side * 2.0 ** -l)) for l in range(N + 1)]
    return SweepResult(w, masses, caps, node_of_leaf)


def frostman(raster: RasterSet, beta: float, safety: float = BALL_SAFETY) -> DiscreteMeasure:
    """Measure on the raster with mu(S) <= side(S)^beta / safety on every dyadic square."""
    beta = check_beta(beta)
    sweep = frostman_sweep(raster, PowerLaw(beta))
    return DiscreteMeasure(raster.leaf_centers(), sweep.weights / safety)


def frostman_lower(raster: RasterSet, beta: float, eta: float, j: float,
                   safety: float = BALL_SAFETY) -> DiscreteMeasure:
    """Frostman sweep under the ladder cap h_j, whose ball ratios decay below the crossover."""
    sweep = frostman_sweep(raster, Ladder(check_beta(beta), eta, j))
    return DiscreteMeasure(raster.leaf_centers(), sweep.weights / safety)


@dataclass
class GrowthReport:
    max_ratio: float
    worst_ball: Optional[tuple]
    samples: int

    @property
    def passes(self) -> bool:
        return self.max_ratio <= 1.0

    def to_dict(self) -> dict:
        ball = None
        if self.worst_ball is not None:
            c, r = self.worst_ball
            ball = {"center": [c.real, c.imag], "radius": r}
        return {"maxRatio": self.max_ratio, "worstBall": ball, "samples": self.samples,
                "passes": self.passes}


def default_radii(mu: DiscreteMeasure, r_min: Optional[float] = None) -> np.ndarray:
    if r_min is None:
        if len(mu) > 1:
            from scipy.spatial import cKDTree
            xy = np.column_stack([mu.points.real, mu.points.imag])
            d, _ = cKDTree(xy).query(xy, k=2)
            r_min = float(d[:, 1].min()) / 2 if d[:, 1].min() > 0 else 2.0 ** -20
        else:
            r_min = 2.0 ** -20
    top = 0
    bottom = int(np.ceil(-np.log2(r_min)))
    return 2.0 ** -np.arange(top, bottom + 1)


def default_centers(mu: DiscreteMeasure, grid: int = 33) -> np.ndarray:
    if len(mu):
        x0, x1 = mu.points.real.min(), mu.points.real.max()
        y0, y1 = mu.points.imag.min(), mu.points.imag.max()
        pad = max(x1 - x0, y1 - y0, 1e-9) * 0.25
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
        pad = 0.0
    xs = np.linspace(x0 - pad, x1 + pad, grid)
    ys = np.linspace(y0 - pad, y1 + pad, grid)
    gx, gy = np.meshgrid(xs, ys)
    return np.concatenate([mu.points, (gx + 1j * gy).ravel()])


def growth_check(mu: DiscreteMeasure, beta: float, centers=None, radii=None,
                 r_min: Optional[float] = None, chunk: int = 256) -> GrowthReport:
    """Exact max of mu(closed B(a, r)) / r^beta over the sampled centres and radii.

    Pass the raster's leaf side as ``r_min`` for measures built on a raster: below
    that scale every atomic measure fails the bound.
    """
    centers = default_centers(mu) if centers is None else np.asarray(centers, complex).ravel()
    radii = default_radii(mu, r_min) if radii is None else np.asarray(radii, float).ravel()
    samples = len(centers) * len(radii)
    if len(mu) == 0 or mu.total == 0:
        return GrowthReport(0.0, None, samples)
    best, worst = -1.0, None
    rb = radii ** beta
    for start in range(0, len(centers), chunk):
        c = centers[start:start + chunk]
        d = np.abs(c[:, None] - mu.points[None, :])
        order = np.argsort(d, axis=1)
        ds = np.take_along_axis(d, order, axis=1)
        cw = np.concatenate([np.zeros((len(c), 1)), np.cumsum(mu.weights[order], axis=1)], axis=1)
        for k, r in enumerate(radii):
            cnt = (ds <= r * (1 + 1e-12)).sum(axis=1)
            ratio = cw[np.arange(len(c)), cnt] / rb[k]
            i = int(np.argmax(ratio))
            if ratio[i] > best:
                best, worst = float(ratio[i]), (complex(c[i]), float(r))
    return GrowthReport(best, worst, samples)
