"""Wiener-type series over dyadic annuli, verdicts, and the divergence witness.

For a boundary point b the series is

    sum_n 2^((k+1) n) * content(A_n(b) minus U),    A_n(b): 2^(-n-1) <= |z - b| <= 2^(-n),

with beta = s + 1.  Parametric slit and road-runner domains get an exact
geometric-ratio verdict; raster scenes can certify divergence (a continuum
crossing every annulus of a tail window) but never convergence, except in the
trivial case of no obstacles at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from .content import dyadic_content, lower_content_raster
from .config import HARD_DEPTH_CAP
from .errors import DepthInsufficient, NotDivergent
from .geom import (Annulus, DyadicSquare, ParametricDomain, RasterSet, Scene, annulus_clip,
                   parametric_obstacles, rasterize)
from .measures import DiscreteMeasure, frostman
from .smoothfn import GridFunction, SmoothProfile
from .transforms import PoissonGridSpec, TsNormEstimate, cauchy_transform, ts_norm_estimate

CONVERGES, DIVERGES, UNDETERMINED = "Converges", "Diverges", "Undetermined"


@dataclass(frozen=True)
class SeriesSpec:
    s: float
    k: int = 0
    content: str = "upper"      # "upper": dyadic content; "lower": ladder estimate
    b: complex = 0j
    eta: float = 0.5

    def __post_init__(self):
        if not -1.0 < self.s < 0.0:
            raise ValueError(f"s must lie in (-1, 0), got {self.s}")
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("k must be a nonnegative integer")
        if self.content not in ("upper", "lower"):
            raise ValueError("content must be 'upper' or 'lower'")

    @property
    def beta(self) -> float:
        return self.s + 1.0


@dataclass
class SeriesReport:
    terms: list                      # (n, 2^((k+1)n) * content)
    partial_sums: list
    verdict: str
    tail_model: Optional[dict] = None
    dual_norm_estimate: float = 0.0
    warnings: list = field(default_factory=list)
    truncation: Optional[int] = None

    def to_dict(self) -> dict:
        d = {"terms": [[int(n), float(v)] for n, v in self.terms],
             "partialSums": [float(v) for v in self.partial_sums],
             "verdict": self.verdict, "tailModel": self.tail_model,
             "dualNormEstimate": float(self.dual_norm_estimate), "warnings": list(self.warnings)}
        if self.truncation is not None:
            d["truncation"] = int(self.truncation)
        return d


def _report(terms, verdict, **kw) -> SeriesReport:
    sums = np.cumsum([v for _, v in terms]).tolist() if terms else []
    est = sums[-1] if sums else 0.0
    return SeriesReport(list(terms), sums, verdict, dual_norm_estimate=est, **kw)


def _content(raster: RasterSet, spec: SeriesSpec) -> float:
    if raster.is_empty:
        return 0.0
    if spec.content == "lower":
        return lower_content_raster(raster, spec.beta, spec.eta).value
    return dyadic_content(raster, spec.beta).value


# -- obstacle rasters per annulus -------------------------------------------

def adaptive_depth(domain: ParametricDomain, n: int, resolution: int = 2) -> int:
    """Relative depth giving the smallest obstacle meeting A_n(0) 2^resolution leaves per radius."""
    idx = np.arange(1, 200)
    a, r = domain.centers(idx), domain.radii(idx)
    meets = (a - r <= 2.0 ** -n) & (a + r >= 2.0 ** (-n - 1))
    if not meets.any():
        return 1
    need = math.ceil(math.log2(2.0 ** -n / r[meets].min())) + resolution
    return int(min(max(need, 1), HARD_DEPTH_CAP))


def parametric_annulus_raster(domain: ParametricDomain, n: int, depth: Optional[int] = None):
    """Obstacles of a parametric domain inside A_n(0), on the local root [0, 2^-n]^2.

    The raster is sparse, so the relative depth may exceed the dense-raster cap up to
    the hard cap; ``depth=None`` picks it per annulus.  Returns ``(raster, truncation)``;
    obstacles with radius below the leaf side are dropped and their first index is the
    truncation.
    """
    if depth is None:
        depth = adaptive_depth(domain, n)
    root = DyadicSquare(0, 0, n)
    leaf = root.side * 2.0 ** -depth
    shapes, trunc = parametric_obstacles(domain, leaf, root)
    raster = rasterize(Scene(root, tuple(shapes)), depth, clip=True, depth_cap=max(depth, 1))
    return annulus_clip(raster, Annulus(0j, n)), trunc


def scene_obstacles(scene: Scene, depth: int) -> RasterSet:
    return rasterize(Scene(scene.root, scene.shapes), depth, clip=True)


def _check_resolves(raster: RasterSet, n: int):
    if 2.0 ** (-n - 1) < raster.leaf_side:
        raise DepthInsufficient(f"annulus {n} (width {2.0 ** (-n - 1):g}) is below leaf side "
                                f"{raster.leaf_side:g}; raise depth")


def _boundary_warnings(obstacles: RasterSet, b: complex, n: int) -> list:
    ann = Annulus(b, n)
    clip = annulus_clip(obstacles, ann)
    out = []
    if clip.is_empty:
        out.append(f"annulus {n} meets no obstacle cell")
    else:
        full = annulus_clip(RasterSet.full(obstacles.root, obstacles.depth), ann)
        if len(clip) == len(full):
            out.append(f"annulus {n} lies entirely in the complement of U")
    return out


def series_terms(domain: Union[Scene, ParametricDomain], spec: SeriesSpec, n_max: int,
                 depth: Optional[int] = None) -> SeriesReport:
    """Raster terms 2^((k+1)n) content(A_n(b) minus U) for n = 1..n_max.

    Parametric domains are rastered per annulus on the local root [0, 2^-n]^2 at
    relative `depth` (adaptive when None); scenes are rastered once on their root at
    `depth` (default 12).
    """
    weight = lambda n: 2.0 ** ((spec.k + 1) * n)
    terms, warnings = [], []
    if isinstance(domain, ParametricDomain):
        trunc = None
        for n in range(1, n_max + 1):
            raster, trunc = parametric_annulus_raster(domain, n, depth)
            terms.append((n, weight(n) * _content(raster, spec)))
        if trunc is not None and trunc <= n_max:
            warnings.append(f"obstacles from index {trunc} on fall below leaf scale")
        return _report(terms, UNDETERMINED, warnings=warnings, truncation=trunc,
                       tail_model=_closed_form(domain, spec))
    if isinstance(domain, Scene):
        depth = 12 if depth is None else depth
        b = complex(*domain.b)
        obstacles = scene_obstacles(domain, depth)
        for n in range(1, n_max + 1):
            _check_resolves(obstacles, n)
            warnings += _boundary_warnings(obstacles, b, n)
            terms.append((n, weight(n) * _content(annulus_clip(obstacles, Annulus(b, n)), spec)))
        verdict = CONVERGES if obstacles.is_empty else UNDETERMINED
        return _report(terms, verdict, warnings=warnings)
    raise TypeError(f"unsupported domain {domain!r}")


# -- exact parametric verdict ------------------------------------------------

def _exact_log2(x: float) -> Optional[int]:
    mant, exp = math.frexp(x)
    return exp - 1 if mant == 0.5 else None


def log2_ratio(p: float, q: float, k: int, s: float):
    """log2 of rho = p^((k+1)(s+1)) / q, exact (a Fraction) when p and q are powers of two."""
    lp, lq = _exact_log2(p), _exact_log2(q)
    if lp is not None and lq is not None:
        beta = Fraction(s).limit_denominator(10 ** 9) + 1
        return (k + 1) * beta * lp - lq
    return (k + 1) * (s + 1) * math.log2(p) - math.log2(q)


def _closed_form(domain: ParametricDomain, spec: SeriesSpec) -> dict:
    lr = log2_ratio(domain.p, domain.q, spec.k, spec.s)
    rho = 2.0 ** float(lr)
    model = {"kind": "geometric", "ratio": rho, "log2Ratio": float(lr),
             "firstTerm": domain.c0 ** ((spec.k + 1) * spec.beta) / domain.a0 * rho}
    if lr < 0:
        model["sum"] = domain.c0 ** ((spec.k + 1) * spec.beta) / domain.a0 * rho / (1.0 - rho)
    return model


def closed_form_terms(domain: ParametricDomain, spec: SeriesSpec, n_max: int) -> list:
    """(n, r_n^((k+1) beta) / a_n) for n = 1..n_max."""
    n = np.arange(1, n_max + 1)
    vals = domain.radii(n) ** ((spec.k + 1) * spec.beta) / domain.centers(n)
    return list(zip(n.tolist(), vals.tolist()))


def classify_parametric(domain: ParametricDomain, spec: SeriesSpec, n_terms: int = 0) -> SeriesReport:
    """Geometric-ratio verdict: Converges iff p^((k+1)(s+1)) / q < 1."""
    model = _closed_form(domain, spec)
    verdict = CONVERGES if model["log2Ratio"] < 0 else DIVERGES
    terms = closed_form_terms(domain, spec, n_terms) if n_terms else []
    rep = _report(terms, verdict, tail_model=model)
    if "sum" in model:
        rep.dual_norm_estimate = model["sum"]
    else:
        rep.dual_norm_estimate = math.inf
    return rep


# -- raster classification -----------------------------------------------------

def crosses_annulus(obstacles: RasterSet, b: complex, n: int) -> bool:
    """True when one 8-connected component of obstacle cells in A_n(b) meets both circles.

    Such a component is a continuum of diameter >= 2^(-n-1), so the annulus term
    is at least 2^((k+1)n) 2^(-(n+1) beta) up to the dyadic comparison constant.
    """
    ann = Annulus(b, n)
    clip = annulus_clip(obstacles, ann)
    if clip.is_empty:
        return False
    lo = clip.cells.min(axis=0)
    grid = np.zeros(tuple(clip.cells.max(axis=0) - lo + 1), bool)
    local = clip.cells - lo
    grid[local[:, 0], local[:, 1]] = True
    labels, _ = ndimage.label(grid, structure=np.ones((3, 3), bool))
    lab = labels[local[:, 0], local[:, 1]]
    x0, y0, h = clip.leaf_bounds()
    dx = np.maximum(np.maximum(b.real - (x0 + h), x0 - b.real), 0.0)
    dy = np.maximum(np.maximum(b.imag - (y0 + h), y0 - b.imag), 0.0)
    dmin = np.hypot(dx, dy)
    fx = np.maximum(np.abs(x0 - b.real), np.abs(x0 + h - b.real))
    fy = np.maximum(np.abs(y0 - b.imag), np.abs(y0 + h - b.imag))
    dmax = np.hypot(fx, fy)
    inner = set(lab[dmin <= ann.inner].tolist())
    outer = set(lab[dmax >= ann.outer].tolist())
    return bool(inner & outer)


def classify(domain: Union[Scene, ParametricDomain], spec: SeriesSpec, n_max: int = 10,
             depth: int = 12, tail: Optional[int] = None) -> SeriesReport:
    """Parametric domains: exact ratio test.  Scenes: continuum detector over a tail window."""
    if isinstance(domain, ParametricDomain):
        return classify_parametric(domain, spec, n_terms=n_max)
    if isinstance(domain, Scene) and domain.parametric is not None:
        return classify_parametric(domain.parametric, spec, n_terms=n_max)
    rep = series_terms(domain, spec, n_max, depth)
    if rep.verdict == CONVERGES:
        return rep
    b = complex(*domain.b)
    obstacles = scene_obstacles(domain, depth)
    window = tail if tail is not None else max(1, (n_max + 1) // 2)
    ns = range(max(1, n_max - window + 1), n_max + 1)
    if all(crosses_annulus(obstacles, b, n) for n in ns):
        rep.verdict = DIVERGES
        rep.tail_model = {"kind": "continuum", "window": [ns.start, ns.stop - 1],
                          "lowerTerm": f"2^(({spec.k}+1)n) * 2^(-(n+1)*{spec.beta})"}
    return rep


# -- divergence witness ------------------------------------------------------

@dataclass
class DivergenceWitness:
    N: int
    measures: list                   # (n, lambda_n, mu_n)
    value_at_zero: complex
    per_term: list                   # (n, h_n(0))
    norm_bound_grid: float
    norm_estimate: Optional[TsNormEstimate] = None
    contents: list = field(default_factory=list)

    def soundness_slack(self) -> list:
        """Re h_n(0) / (lambda_n 2^n ||mu_n|| / (sqrt 2 pi)) per term; each must be >= 1."""
        out = []
        for (n, lam, mu), (_, h) in zip(self.measures, self.per_term):
            floor = lam * 2.0 ** n * mu.total / (math.sqrt(2) * math.pi)
            out.append(h.real / floor if floor > 0 else math.inf)
        return out

    def to_dict(self) -> dict:
        return {"N": self.N,
                "lambdas": [[n, lam, mu.total] for n, lam, mu in self.measures],
                "valueAtZero": [self.value_at_zero.real, self.value_at_zero.imag],
                "perTerm": [[n, h.real, h.imag] for n, h in self.per_term],
                "normBoundGrid": self.norm_bound_grid}


def in_sector(points: np.ndarray, half_angle: float = math.pi / 4) -> np.ndarray:
    """Closed sector |arg z| <= half_angle around the positive real axis."""
    return np.abs(np.angle(points)) <= half_angle + 1e-15


def witness_grid(t_min: float = 2.0 ** -16, nz: int = 64, nt: int = 48) -> PoissonGridSpec:
    return PoissonGridSpec(-0.25, 1.0, -0.625, 0.625, nz, t_min, 4.0, nt)


def divergence_witness(domain: ParametricDomain, spec: SeriesSpec, N: int, depth: Optional[int] = None,
                       grid: Optional[PoissonGridSpec] = None) -> DivergenceWitness:
    """h_n = -lambda_n C(mu_n) with mu_n a Frostman measure on A_n minus U inside the sector.

    Every atom p of mu_n sits in |arg p| <= pi/4 with |p| <= 2^-n, so
    Re(1/p) >= 2^n / sqrt 2 and Re h_n(0) >= lambda_n 2^n ||mu_n|| / (sqrt 2 pi) > 0.
    ``norm_bound_grid`` is the grid sup of t^(2 - beta) |P_t * sum lambda_n mu_n|.
    """
    if classify_parametric(domain, spec).verdict != DIVERGES:
        raise NotDivergent(f"series converges at s={spec.s}, k={spec.k}; no witness exists")
    measures, per_term, contents = [], [], []
    total = DiscreteMeasure.zero()
    value = 0j
    for n in range(1, N + 1):
        raster, _ = parametric_annulus_raster(domain, n, depth)
        if raster.is_empty:
            continue
        mu = frostman(raster, spec.beta)
        mu = mu.restrict(in_sector(mu.points) & Annulus(0j, n).contains_points(mu.points))
        m2 = dyadic_content(raster, spec.beta).value
        lam = min(1.0, 1.0 / (2.0 ** n * m2)) if m2 > 0 else 1.0
        h0 = -lam * complex(cauchy_transform(mu, 0j))
        measures.append((n, lam, mu))
        per_term.append((n, h0))
        contents.append((n, m2))
        total = total + mu * lam
        value += h0
    grid = witness_grid() if grid is None else grid
    est = ts_norm_estimate(total, spec.beta - 2.0, grid)
    return DivergenceWitness(N, measures, value, per_term, est.value, est, contents)


# -- annular partition ---------------------------------------------------------

LOG_BUMP = SmoothProfile(plateau=0.5, cutoff=1.5)


def _log_bump(v):
    """Profile in log-radius: 1 for |v - 1/2| <= 1/2, 0 for |v - 1/2| >= 3/2."""
    return LOG_BUMP(v - 0.5)


def annular_weight(v):
    """phi(v) = bump(v) / sum_m bump(v - m); v = -log2|z - b| - n."""
    v = np.asarray(v, dtype=float)
    base = np.floor(v)
    total = np.zeros_like(v)
    for m in range(-3, 4):
        total += _log_bump(v - (base + m))
    return _log_bump(v) / total


@dataclass
class AnnularFunction:
    n: int
    phi: GridFunction
    phi_over_z: GridFunction


def annular_test_functions(b: complex = 0j, n_max: int = 8, n_min: int = 0,
                           cells: int = 256) -> list:
    """phi_n supported in A_{n-1} u A_n u A_{n+1}, summing to 1 off b, with phi_n / (z - b)."""
    b = complex(b)
    out = []
    for n in range(n_min, n_max + 1):
        R = 2.0 ** (-n + 1)
        h = 2 * R / cells
        half = R + 4 * h

        def sample(X, Y, n=n):
            r = np.hypot(X - b.real, Y - b.imag)
            vals = np.zeros_like(r)
            live = r > 0
            vals[live] = annular_weight(-np.log2(r[live]) - n)
            return vals

        phi = GridFunction.sample(sample, b.real - half, b.real + half, b.imag - half, b.imag + half, h)
        X, Y = phi.nodes()
        Z = X + 1j * Y - b
        quot = np.zeros(Z.shape, complex)
        live = phi.values != 0
        quot[live] = phi.values[live] / Z[live]
        out.append(AnnularFunction(n, phi, GridFunction(phi.origin, h, quot)))
    return out
