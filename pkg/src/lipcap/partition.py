"""Partition of unity subordinate to a dyadic cover, built generation by generation.

Given dyadic squares S_n (side <= 1) covering a compact set E, produce finitely
many test functions phi_n with sum 1 near E, supp phi_n inside 5 S_n, and N_k
bounded independently of the generation depth.

Steps: order squares by nonincreasing size, keep a finite subcover of the open
5/4-dilations, drop squares lying in a cordon (5/4 S) minus S of an earlier
square, group by side 2^-m, and for each generation in increasing m

    sigma_m = sum of psi_S over G_m^+,
    phi_T   = (1 - tau_{m-1}) * sum over S allocated to T of psi_S,
    tau_m   = tau_{m-1} + (1 - tau_{m-1}) * sigma_m.

All functions are evaluated on tensor grids: psi_S factors over x and y.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import GridTooCoarse, NotACover, SquareTooLarge
from .geom import DyadicSquare, RasterSet
from .smoothfn import MIN_CELLS_PER_DIAMETER, GridFunction, nk_seminorm, psi_1d


@dataclass
class PartitionAtom:
    phi: GridFunction
    home: DyadicSquare
    generation: int


@dataclass
class PartitionResult:
    atoms: list
    covered: RasterSet
    sum_field: GridFunction
    nk_bounds: dict                 # generation -> max N_k over its atoms
    k: int
    squares_kept: list
    sum_error_max: float
    support_violations: int
    value_range: tuple
    tau_gradient: dict              # generation m -> sup |grad tau_m| * 2^-m near G_m

    @property
    def max_nk(self) -> float:
        return max(self.nk_bounds.values()) if self.nk_bounds else 0.0

    def summary(self) -> dict:
        return {"atomCount": len(self.atoms), f"maxN{self.k}": self.max_nk,
                "sumErrorMax": self.sum_error_max, "supportViolations": self.support_violations,
                "generations": sorted(self.nk_bounds),
                "tauGradient": max(self.tau_gradient.values(), default=0.0)}


def _as_square(sq) -> DyadicSquare:
    if isinstance(sq, DyadicSquare):
        return sq
    m, r, n = (int(v) for v in sq)
    if n < 0:
        raise SquareTooLarge(f"square {(m, r, n)} has side 2^{-n} > 1")
    return DyadicSquare(m, r, n)


def _leaf_boxes(E: RasterSet):
    x0, y0, h = E.leaf_bounds()
    return x0, y0, h


def _refine(E: RasterSet, depth: int) -> RasterSet:
    k = depth - E.depth
    if k <= 0:
        return E
    w = 1 << k
    di, dj = np.meshgrid(np.arange(w), np.arange(w), indexing="ij")
    cells = (E.cells[:, None, :] * w + np.stack([di.ravel(), dj.ravel()], axis=1)[None]).reshape(-1, 2)
    return RasterSet.from_cells(E.root, depth, cells)


def _check_cover(E: RasterSet, squares: list[DyadicSquare]) -> RasterSet:
    """Refine E to the finest square level and verify every leaf lies in some square."""
    finest = max(s.n for s in squares)
    if finest > E.leaf_level:
        E = _refine(E, E.depth + finest - E.leaf_level)
    if E.is_empty:
        return E
    L = E.leaf_level
    gi = (E.root.m << E.depth) + E.cells[:, 0]
    gj = (E.root.r << E.depth) + E.cells[:, 1]
    covered = np.zeros(len(E), bool)
    by_level: dict[int, set] = {}
    for s in squares:
        by_level.setdefault(s.n, set()).add((s.m, s.r))
    for n, members in by_level.items():
        shift = L - n
        keys = np.array([(m << 32) + r for m, r in members], dtype=np.int64)
        covered |= np.isin(((gi >> shift) << 32) + (gj >> shift), keys)
    if not covered.all():
        bad = E.cells[~covered][0]
        raise NotACover(f"{(~covered).sum()} occupied leaves are not covered, e.g. cell {tuple(bad)}")
    return E


def _subcover(E: RasterSet, ordered: list[DyadicSquare]) -> list[DyadicSquare]:
    """Greedy pass keeping a square iff its open 5/4-dilation holds a not-yet-covered leaf."""
    x0, y0, h = _leaf_boxes(E)
    uncovered = np.ones(len(E), bool)
    kept = []
    for s in ordered:
        if not uncovered.any():
            break
        xa, xb, ya, yb = s.bounds(1.25)
        inside = (x0 > xa) & (x0 + h < xb) & (y0 > ya) & (y0 + h < yb)
        hit = inside & uncovered
        if hit.any():
            kept.append(s)
            uncovered &= ~inside
    return kept


def _in_cordon(t: DyadicSquare, s: DyadicSquare) -> bool:
    """t inside (5/4 s) minus s (t closed, so it may not touch s)."""
    xa, xb, ya, yb = s.bounds(1.25)
    tx0, ty0, ts = t.x0, t.y0, t.side
    inside = tx0 >= xa and tx0 + ts <= xb and ty0 >= ya and ty0 + ts <= yb
    sx0, sy0, ss = s.x0, s.y0, s.side
    apart = tx0 > sx0 + ss or tx0 + ts < sx0 or ty0 > sy0 + ss or ty0 + ts < sy0
    return inside and apart


def _prune(kept: list[DyadicSquare]) -> list[DyadicSquare]:
    out = list(kept)
    i = 0
    while i < len(out):
        s = out[i]
        out = out[:i + 1] + [t for t in out[i + 1:] if not _in_cordon(t, s)]
        i += 1
    return out


def _allocate(G: list[DyadicSquare]) -> dict:
    """Map every S in G^+ to a square n(S) in G with S in n(S)^+; ties to smallest (m, r)."""
    members = set(G)
    alloc = {}
    for T in sorted(G, key=lambda s: (s.m, s.r)):
        for S in T.neighbors():
            if S in members:
                alloc[S] = S
            elif S not in alloc:
                alloc[S] = T
    return alloc


# values below this are rounding residue of 1 - tau where tau == 1 exactly
ROUNDOFF_FLOOR = 64 * np.finfo(float).eps


def _window(xs, lo, hi):
    return slice(int(np.searchsorted(xs, lo, "right")), int(np.searchsorted(xs, hi, "left")))


class _Construction:
    def __init__(self, generations: dict):
        self.gens = generations
        self.levels = sorted(generations)
        self.alloc = {m: _allocate(G) for m, G in generations.items()}

    def add_psi(self, S: DyadicSquare, xs, ys, out, weight=None):
        xa, xb, ya, yb = S.bounds(1.5)
        ix, iy = _window(xs, xa, xb), _window(ys, ya, yb)
        if ix.start >= ix.stop or iy.start >= iy.stop:
            return
        block = np.outer(psi_1d(S.r, S.n, ys[iy]), psi_1d(S.m, S.n, xs[ix]))
        out[iy, ix] += block

    def sigma(self, m, xs, ys):
        out = np.zeros((len(ys), len(xs)))
        for S in self.alloc[m]:
            self.add_psi(S, xs, ys, out)
        return out

    def tau_before(self, m, xs, ys):
        return 1.0 - self.omega_before(m, xs, ys)

    def omega_before(self, m, xs, ys):
        """1 - tau_{m-1}, carried as a product so it stays accurate near zero."""
        omega = np.ones((len(ys), len(xs)))
        for level in self.levels:
            if level >= m:
                break
            omega = omega * np.clip(1.0 - self.sigma(level, xs, ys), 0.0, 1.0)
        return omega

    def atom_values(self, T: DyadicSquare, xs, ys, omega=None):
        if omega is None:
            omega = self.omega_before(T.n, xs, ys)
        acc = np.zeros((len(ys), len(xs)))
        for S, owner in self.alloc[T.n].items():
            if owner == T:
                self.add_psi(S, xs, ys, acc)
        vals = omega * acc
        vals[np.abs(vals) <= ROUNDOFF_FLOOR] = 0.0
        return vals


def _lattice(lo, hi, h, pad=2):
    start = (np.floor(lo / h) - pad) * h
    count = int(np.ceil(hi / h) + pad - (np.floor(lo / h) - pad)) + 1
    return start + h * np.arange(count)


def build_partition(squares: Iterable, E: RasterSet, k: int = 3,
                    cells_per_side: int = 64, sum_spacing: Optional[float] = None) -> PartitionResult:
    squares = [_as_square(s) for s in squares]
    if not squares:
        if E.is_empty:
            empty = GridFunction((0.0, 0.0), 1.0, np.zeros((1, 1)))
            return PartitionResult([], E, empty, {}, k, [], 0.0, 0, (0.0, 0.0), {})
        raise NotACover("no squares given for a nonempty set")
    E_fine = _check_cover(E, squares)
    ordered = sorted(set(squares), key=lambda s: (s.n, s.m, s.r))
    kept = _prune(_subcover(E_fine, ordered)) if not E_fine.is_empty else []
    generations: dict[int, list] = {}
    for s in kept:
        generations.setdefault(s.n, []).append(s)
    con = _Construction(generations)

    atoms, nk_bounds = [], {}
    violations, vmin, vmax, tau_grad = 0, 0.0, 0.0, {}
    for m in con.levels:
        for T in sorted(generations[m], key=lambda s: (s.m, s.r)):
            h = T.side / cells_per_side
            xa, xb, ya, yb = T.bounds(5.0)
            xs, ys = _lattice(xa, xb, h), _lattice(ya, yb, h)
            omega = con.omega_before(m, xs, ys)
            vals = con.atom_values(T, xs, ys, omega)
            phi = GridFunction((xs[0], ys[0]), h, vals)
            iy, ix = np.nonzero(vals)
            tol = 1e-12 * T.side
            outside = ((xs[ix] < xa - tol) | (xs[ix] > xb + tol) | (ys[iy] < ya - tol) | (ys[iy] > yb + tol))
            violations += int(outside.sum())
            vmin, vmax = min(vmin, float(vals.min())), max(vmax, float(vals.max()))
            nk = _atom_nk(con, T, phi, k)
            nk_bounds[m] = max(nk_bounds.get(m, 0.0), nk)
            tau_m = 1.0 - omega * (1.0 - con.sigma(m, xs, ys))
            gy, gx = np.gradient(tau_m, h)
            tau_grad[m] = max(tau_grad.get(m, 0.0), float(np.hypot(gx, gy).max()) * T.side)
            atoms.append(PartitionAtom(phi, T, m))

    sum_field, err = _sum_check(E, atoms, sum_spacing)
    return PartitionResult(atoms, E, sum_field, nk_bounds, k, kept, err, violations,
                           (vmin, vmax), tau_grad)


def _atom_nk(con: _Construction, T: DyadicSquare, phi: GridFunction, k: int,
             max_refine: int = 4) -> float:
    """N_k of an atom, resampling on a finer grid when the support is a thin sliver."""
    for _ in range(max_refine + 1):
        try:
            return nk_seminorm(phi, k).value
        except GridTooCoarse:
            iy, ix = np.nonzero(phi.values)
            xs, ys = phi.xs, phi.ys
            h = min(phi.spacing / 2, phi.support_diameter / (2 * MIN_CELLS_PER_DIAMETER))
            xs = _lattice(xs[ix.min()], xs[ix.max()], h, pad=4)
            ys = _lattice(ys[iy.min()], ys[iy.max()], h, pad=4)
            phi = GridFunction((xs[0], ys[0]), h, con.atom_values(T, xs, ys))
    return nk_seminorm(phi, k).value


def neighbourhood_mask(E: RasterSet, xs, ys, margin: float) -> np.ndarray:
    """Nodes within sup-distance `margin` of an occupied leaf of E."""
    size = E.size
    occ = np.zeros((size + 2, size + 2), bool)
    occ[E.cells[:, 0] + 1, E.cells[:, 1] + 1] = True
    h = E.leaf_side
    X, Y = np.meshgrid(xs, ys)
    mask = np.zeros(X.shape, bool)
    for dx in (-margin, margin):
        for dy in (-margin, margin):
            i = np.floor((X + dx - E.root.x0) / h).astype(int) + 1
            j = np.floor((Y + dy - E.root.y0) / h).astype(int) + 1
            ok = (i >= 0) & (i < size + 2) & (j >= 0) & (j < size + 2)
            hit = np.zeros(X.shape, bool)
            hit[ok] = occ[i[ok], j[ok]]
            mask |= hit
    # exact boundary points of closed leaves
    for dx in (-margin, 0.0, margin):
        for dy in (-margin, 0.0, margin):
            i = np.ceil((X + dx - E.root.x0) / h).astype(int)
            j = np.ceil((Y + dy - E.root.y0) / h).astype(int)
            ok = (i >= 0) & (i < size + 2) & (j >= 0) & (j < size + 2)
            hit = np.zeros(X.shape, bool)
            hit[ok] = occ[i[ok], j[ok]]
            mask |= hit
    return mask


def _sum_check(E: RasterSet, atoms: list, spacing: Optional[float]):
    """Sum the atoms on a common grid over E; max |sum - 1| within a quarter leaf of E."""
    if E.is_empty:
        return GridFunction((0.0, 0.0), 1.0, np.zeros((1, 1))), 0.0
    leaf = E.leaf_side
    h = leaf / 8 if spacing is None else spacing
    margin = leaf / 4
    x0, y0 = E.root.x0, E.root.y0
    xs = _lattice(x0 - margin, x0 + E.root.side + margin, h, pad=0)
    ys = _lattice(y0 - margin, y0 + E.root.side + margin, h, pad=0)
    total = np.zeros((len(ys), len(xs)))
    for atom in atoms:
        phi = atom.phi
        ix = _window(xs, phi.xs[0] - 1e-12, phi.xs[-1] + 1e-12)
        iy = _window(ys, phi.ys[0] - 1e-12, phi.ys[-1] + 1e-12)
        if ix.start >= ix.stop or iy.start >= iy.stop:
            continue
        pts = np.add.outer(1j * ys[iy], xs[ix])
        total[iy, ix] += phi.at(pts.ravel(), tol=1e-6).reshape(pts.shape).real
    mask = neighbourhood_mask(E, xs, ys, margin)
    err = float(np.abs(total[mask] - 1.0).max()) if mask.any() else 0.0
    return GridFunction((xs[0], ys[0]), h, total), err
