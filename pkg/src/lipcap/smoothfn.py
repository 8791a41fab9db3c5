"""Grid-sampled test functions, N_k seminorms, pinchers and the tessellation partition.

Grid convention: ``values[i, j]`` is the sample at ``(x0 + j*h, y0 + i*h)``
(rows run along y, columns along x).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import GridTooCoarse, PhiDomainMismatch

PLATEAU = 5.0 / 8.0
CUTOFF = 3.0 / 4.0


def _g(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    a, b = _g(u), _g(1.0 - u)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothProfile:
    """Nonincreasing C-infinity profile: 1 on [0, plateau], 0 on [cutoff, inf)."""

    plateau: float = PLATEAU
    cutoff: float = CUTOFF

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return 1.0 - smooth_step((r - self.plateau) / (self.cutoff - self.plateau))


RHO = SmoothProfile()


@dataclass(frozen=True, eq=False)
class GridFunction:
    origin: tuple
    spacing: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def sample(cls, f, xmin, xmax, ymin, ymax, spacing) -> "GridFunction":
        """Sample f(X, Y) on the lattice through (xmin, ymin) covering the box."""
        nx = int(np.ceil((xmax - xmin) / spacing - 1e-9)) + 1
        ny = int(np.ceil((ymax - ymin) / spacing - 1e-9)) + 1
        xs = xmin + spacing * np.arange(nx)
        ys = ymin + spacing * np.arange(ny)
        X, Y = np.meshgrid(xs, ys)
        return cls((xmin, ymin), spacing, f(X, Y))

    @property
    def shape(self):
        return self.values.shape

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.values.shape[1])

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.values.shape[0])

    def nodes(self):
        return np.meshgrid(self.xs, self.ys)

    @cached_property
    def support_diameter(self) -> float:
        """Diameter of the nonzero nodes, widened by one spacing (half a cell at each end)."""
        iy, ix = np.nonzero(self.values)
        if len(ix) == 0:
            return 0.0
        pts = np.column_stack([ix, iy]).astype(float)
        try:
            if len(pts) > 3:
                pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass
        if len(pts) > 2000:
            pts = pts[np.linspace(0, len(pts) - 1, 2000).astype(int)]
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)).max()
        return float((d + 1.0) * self.spacing)

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.origin == other.origin and self.spacing == other.spacing
                and self.values.shape == other.values.shape)

    def _check(self, other):
        if not self.same_grid(other):
            raise PhiDomainMismatch("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.origin, self.spacing, self.values + other.values)

    def __mul__(self, other) -> "GridFunction":
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.origin, self.spacing, self.values * other.values)
        return GridFunction(self.origin, self.spacing, self.values * other)

    __rmul__ = __mul__

    def map(self, fn) -> "GridFunction":
        return GridFunction(self.origin, self.spacing, fn(self.values))

    def at(self, points, tol: float = 1e-9) -> np.ndarray:
        """Values at complex points: exact at lattice nodes, bilinear in between.

        Raises PhiDomainMismatch for points outside the sampled box.
        """
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        u = (pts.real - self.origin[0]) / self.spacing
        v = (pts.imag - self.origin[1]) / self.spacing
        ny, nx = self.values.shape
        if np.any(u < -tol) or np.any(v < -tol) or np.any(u > nx - 1 + tol) or np.any(v > ny - 1 + tol):
            raise PhiDomainMismatch("points fall outside the grid")
        u = np.clip(u, 0, nx - 1)
        v = np.clip(v, 0, ny - 1)
        ru, rv = np.rint(u), np.rint(v)
        on_node = (np.abs(u - ru) <= tol) & (np.abs(v - rv) <= tol)
        out = np.empty(len(pts), dtype=self.values.dtype)
        out[on_node] = self.values[rv[on_node].astype(int), ru[on_node].astype(int)]
        off = ~on_node
        if off.any():
            i0 = np.minimum(np.floor(u[off]).astype(int), nx - 2) if nx > 1 else np.zeros(off.sum(), int)
            j0 = np.minimum(np.floor(v[off]).astype(int), ny - 2) if ny > 1 else np.zeros(off.sum(), int)
            fu, fv = u[off] - i0, v[off] - j0
            V = self.values
            out[off] = ((1 - fu) * (1 - fv) * V[j0, i0] + fu * (1 - fv) * V[j0, i0 + 1]
                        + (1 - fu) * fv * V[j0 + 1, i0] + fu * fv * V[j0 + 1, i0 + 1])
        return out

    def to_dict(self) -> dict:
        vals = self.values
        d = {"origin": list(self.origin), "spacing": self.spacing,
             "rows": int(vals.shape[0]), "cols": int(vals.shape[1])}
        if np.iscomplexobj(vals):
            d["values"] = [float(x) for x in vals.real.ravel()]
            d["imag"] = [float(x) for x in vals.imag.ravel()]
        else:
            d["values"] = [float(x) for x in vals.ravel()]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GridFunction":
        shape = (int(d["rows"]), int(d["cols"]))
        vals = np.asarray(d["values"], dtype=float).reshape(shape)
        if "imag" in d:
            vals = vals + 1j * np.asarray(d["imag"], dtype=float).reshape(shape)
        return cls(tuple(d["origin"]), float(d["spacing"]), vals)


@dataclass(frozen=True)
class NkValue:
    k: int
    value: float
    grid_order: float


MAX_K = 4
MIN_CELLS_PER_DIAMETER = 64
MAX_NODE_JUMP = 0.5


def derivatives(phi: GridFunction, k: int) -> list[np.ndarray]:
    """All k-th order partials d^k/dx^(k-j) dy^j by iterated central differences."""
    out = []
    for j in range(k + 1):
        a = phi.values
        for _ in range(k - j):
            a = np.gradient(a, phi.spacing, axis=1)
        for _ in range(j):
            a = np.gradient(a, phi.spacing, axis=0)
        out.append(a)
    return out


def nk_seminorm(phi: GridFunction, k: int) -> NkValue:
    """N_k(phi) = d(phi)^k * max over |alpha| = k of sup |d^alpha phi|, by finite differences."""
    if not 0 <= k <= MAX_K:
        raise ValueError(f"k must be in [0, {MAX_K}]")
    sup = float(np.abs(phi.values).max()) if phi.values.size else 0.0
    if k == 0 or sup == 0.0:
        return NkValue(k, sup, phi.spacing)
    d = phi.support_diameter
    if phi.spacing > d / MIN_CELLS_PER_DIAMETER:
        raise GridTooCoarse(f"spacing {phi.spacing:g} exceeds support diameter / {MIN_CELLS_PER_DIAMETER}")
    v = phi.values
    jump = max(np.abs(np.diff(v, axis=0)).max(initial=0.0), np.abs(np.diff(v, axis=1)).max(initial=0.0))
    if jump > MAX_NODE_JUMP * sup:
        raise GridTooCoarse("function is not resolved by the grid (jump between neighbouring nodes)")
    best = max(float(np.abs(a).max()) for a in derivatives(phi, k))
    return NkValue(k, d ** k * best, phi.spacing)


def standard_pincher(b: complex, n: int, profile: SmoothProfile = RHO,
                     cells: int = 1024) -> GridFunction:
    """phi_n(x) = rho(n |x - b|), sampled with `cells` spacings across its support.

    About a thousand cells are needed for N_2 to settle within 1%; the transition
    band of rho is only 1/12 of the support diameter.
    """
    if n < 1:
        raise ValueError("pincher index must be >= 1")
    b = complex(b)
    radius = profile.cutoff / n
    h = 2 * radius / cells
    half = radius + 4 * h
    return GridFunction.sample(lambda X, Y: profile(n * np.hypot(X - b.real, Y - b.imag)),
                               b.real - half, b.real + half, b.imag - half, b.imag + half, h)


# -- tessellation partition of unity ---------------------------------------

def _tess_sum_1d(u, profile: SmoothProfile = RHO):
    """Sum over half-integer centres a of rho(|u - a|); at most two terms are nonzero."""
    base = np.floor(u)
    total = np.zeros_like(u, dtype=float)
    for off in (-1.0, 0.0, 1.0):
        total += profile(u - (base + off + 0.5))
    return total


def psi_1d(index, level: int, x, profile: SmoothProfile = RHO):
    """One-dimensional factor of psi_S for a square with x-index `index` at `level`.

    psi_S(x, y) = psi_1d(m, level, x) * psi_1d(r, level, y), since both theta_S and
    the normalising sum tau factor over the coordinates.
    """
    u = np.asarray(x, dtype=float) * 2.0 ** level
    return profile(u - (index + 0.5)) / _tess_sum_1d(u, profile)


def tau_tess(x, y, level: int = 0, profile: SmoothProfile = RHO):
    """tau = sum of theta_S over the whole tessellation at `level`."""
    s = 2.0 ** level
    return _tess_sum_1d(np.asarray(x) * s, profile) * _tess_sum_1d(np.asarray(y) * s, profile)


def tess_partition(m: int, window: tuple, cells_per_side: int = 64,
                   profile: SmoothProfile = RHO) -> dict:
    """psi_S for S = (i, j) at level m with i0 <= i < i1, j0 <= j < j1, on one shared grid.

    ``window = (i0, i1, j0, j1)``.  The grid covers the union of the 3/2-dilations.
    """
    i0, i1, j0, j1 = window
    side = 2.0 ** -m
    h = side / cells_per_side
    xmin, xmax = (i0 - 0.25) * side, (i1 + 0.25) * side
    ymin, ymax = (j0 - 0.25) * side, (j1 + 0.25) * side
    xs = xmin + h * np.arange(int(round((xmax - xmin) / h)) + 1)
    ys = ymin + h * np.arange(int(round((ymax - ymin) / h)) + 1)
    out = {}
    for i in range(i0, i1):
        fx = psi_1d(i, m, xs, profile)
        for j in range(j0, j1):
            fy = psi_1d(j, m, ys, profile)
            out[(i, j)] = GridFunction((xmin, ymin), h, np.outer(fy, fx))
    return out
