"""Acceptance checks, one function per criterion, shared by `lipcap verify` and pytest."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .content import PowerLaw, ball_bracket, dyadic_content
from .geom import (Annulus, DyadicShape, DyadicSquare, ParametricDomain, RasterSet, Scene, Segment,
                   Disc, annulus_clip, rasterize)
from .measures import DiscreteMeasure, frostman, growth_check
from .partition import build_partition
from .smoothfn import RHO, GridFunction, nk_seminorm, psi_1d, standard_pincher
from .transforms import (PoissonGridSpec, cauchy_eval_pairing, cauchy_transform, ts_norm_estimate,
                         vitushkin_localize)
from .wiener import (CONVERGES, DIVERGES, SeriesSpec, classify, classify_parametric,
                     divergence_witness)

SEED = 20240611

# a_n = 2^-n, r_n = 4^-n written with indices starting at n = 1 and obstacles disjoint:
# a0 q^n = 2^-(n+1), c0 p^n = 4^-(n+1); the ratio test only sees q and p.
SLIT = ParametricDomain("slit", 0.5, 0.5, 0.25, 0.25)
ROADRUNNER = ParametricDomain("roadrunner", 0.5, 0.5, 0.25, 0.25)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {status}  {self.name}: {self.detail} [{self.seconds:.2f}s]"


def _best_time(fn, repeats: int = 7) -> float:
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


# -- 1-3: parametric verdicts -------------------------------------------------

def slit_threshold():
    want = {-0.4: CONVERGES, -0.5: DIVERGES, -0.6: DIVERGES}
    got = {s: classify_parametric(SLIT, SeriesSpec(s, 0)).verdict for s in want}
    slowest = max(_best_time(lambda s=s: classify_parametric(SLIT, SeriesSpec(s, 0))) for s in want)
    ok = got == want and slowest < 1e-3
    return ok, f"verdicts {got}, slowest call {slowest * 1e3:.3f} ms"


def derivation_shift():
    want = {-0.7: CONVERGES, -0.75: DIVERGES, -0.8: DIVERGES}
    got = {s: classify_parametric(SLIT, SeriesSpec(s, 1)).verdict for s in want}
    return got == want, f"verdicts {got}"


def sweep_values(start=-0.9, stop=-0.1, step=0.05):
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def roadrunner_equivalence():
    mismatches = []
    for k in (0, 1, 2):
        for s in sweep_values():
            spec = SeriesSpec(s, k)
            a, b = classify(SLIT, spec).verdict, classify(ROADRUNNER, spec).verdict
            if a != b:
                mismatches.append((s, k, a, b))
    n = 3 * len(sweep_values())
    return not mismatches, f"{n} (s, k) pairs, mismatches {mismatches}"


# -- 4: segment content and brute-force DP oracle -----------------------------

def brute_force_content(raster: RasterSet, beta: float) -> float:
    """Minimum over an explicit enumeration of every dyadic antichain cover's cost."""
    h = PowerLaw(beta)
    occupied = {(int(i), int(j)) for i, j in raster.cells}
    N = raster.depth

    def options(level, i, j):
        shift = N - level
        span = 1 << shift
        if not any((i * span <= a < (i + 1) * span) and (j * span <= b < (j + 1) * span)
                   for a, b in occupied):
            return np.zeros(1)
        own = np.array([float(h(raster.root.side * 2.0 ** -level))])
        if level == N:
            return own
        kids = [options(level + 1, 2 * i + di, 2 * j + dj) for di in (0, 1) for dj in (0, 1)]
        sums = kids[0]
        for kid in kids[1:]:
            sums = np.add.outer(sums, kid).ravel()
        return np.concatenate([own, sums])

    return float(options(0, 0, 0).min())


def random_raster(rng, depth: int, density=None) -> RasterSet:
    size = 1 << depth
    p = rng.uniform(0.05, 0.6) if density is None else density
    mask = rng.random((size, size)) < p
    if not mask.any():
        mask[rng.integers(size), rng.integers(size)] = True
    return RasterSet.from_cells(DyadicSquare(0, 0, 0), depth, np.argwhere(mask))


def segment_content():
    seg = Scene(shapes=(Segment((0.0, 0.0), (1.0, 0.0)),))
    t0 = time.perf_counter()
    exact = {d: dyadic_content(rasterize(seg, d), 0.5).value for d in range(2, 11)}
    rng = np.random.default_rng(SEED)
    bad = []
    for trial in range(50):
        depth = int(rng.integers(1, 4))
        beta = float(rng.uniform(0.1, 0.9))
        r = random_raster(rng, depth)
        dp = dyadic_content(r, beta).value
        bf = brute_force_content(r, beta)
        if abs(dp - bf) > 1e-12 * max(1.0, bf):
            bad.append((trial, dp, bf))
    elapsed = time.perf_counter() - t0
    ok = all(v == 1.0 for v in exact.values()) and not bad and elapsed < 5.0
    return ok, (f"unit segment values {sorted(set(exact.values()))} at depths 2-10, "
                f"DP vs enumeration mismatches {len(bad)}/50, {elapsed:.2f}s")


# -- 5: comparison bracket -----------------------------------------------------

def random_slit(rng, depth: int = 6):
    leaf = 2.0 ** -depth
    r = float(rng.uniform(leaf, 0.25))
    a = float(rng.uniform(r, 1.0 - r))
    y = float(rng.choice([0.0, rng.uniform(0.0, 1.0), np.round(rng.uniform(0, 1) / leaf) * leaf]))
    return Segment((a - r, y), (a + r, y)), r


def comparison_bracket():
    rng = np.random.default_rng(SEED + 5)
    worst = {}
    ok = True
    slits = [random_slit(rng) for _ in range(100)]
    for beta in (0.3, 0.5, 0.7):
        lo, hi = 2.0 ** (-beta - 2), 2.0 ** (beta + 2)
        ratios = []
        for seg, r in slits:
            raster = rasterize(Scene(shapes=(seg,)), 6)
            ratios.append(dyadic_content(raster, beta).value / (2 * r) ** beta)
        worst[beta] = (round(min(ratios), 4), round(max(ratios), 4))
        ok &= lo <= min(ratios) and max(ratios) <= hi
    br = ball_bracket(rasterize(Scene(shapes=(Segment((0.0, 0.0), (1.0, 0.0)),)), 8), 0.5)
    ok &= br.lower <= 1.0 <= br.upper
    return ok, f"raster/closed ratio ranges {worst}; unit-segment ball bracket [{br.lower:.4f}, {br.upper:.4f}]"


# -- 6: delta norm -------------------------------------------------------------

def delta_norm():
    est = ts_norm_estimate(DiscreteMeasure.delta(), -2.0)
    err = abs(est.value - 1.0 / math.pi)
    ok = err <= 1e-9 and abs(est.little_o) <= 0.05
    return ok, f"|value - 1/pi| = {err:.2e}, slope {est.little_o:.2e}"


# -- 7: Frostman growth ------------------------------------------------------------

def cantor_dust(depth: int = 8) -> RasterSet:
    """Four-corner Cantor dust: keep the corner quarters of each square, depth/2 times."""
    cells = np.zeros((1, 2), dtype=np.int64)
    for _ in range(depth // 2):
        corners = np.array([[0, 0], [0, 3], [3, 0], [3, 3]])
        cells = (cells[:, None, :] * 4 + corners[None]).reshape(-1, 2)
    return RasterSet.from_cells(DyadicSquare(0, 0, 0), depth, cells)


def frostman_corpus():
    return {
        "segment": rasterize(Scene(shapes=(Segment((0.0, 0.0), (1.0, 0.0)),)), 8),
        "diagonal": rasterize(Scene(shapes=(Segment((0.1, 0.2), (0.9, 0.7)),)), 8),
        "square": RasterSet.full(DyadicSquare(0, 0, 0), 6),
        "subsquare": rasterize(Scene(shapes=(DyadicShape(1, 2, 2),)), 7),
        "cantor": cantor_dust(8),
    }


def frostman_growth():
    worst, short = 0.0, []
    for name, raster in frostman_corpus().items():
        for beta in (0.3, 0.5, 0.7):
            mu = frostman(raster, beta)
            g = growth_check(mu, beta, r_min=raster.leaf_side)
            m2 = dyadic_content(raster, beta).value
            worst = max(worst, g.max_ratio)
            if mu.total < m2 / 8 * (1 - 1e-12):
                short.append((name, beta, mu.total, m2 / 8))
    ok = worst <= 1.0 and not short
    return ok, f"max mu(B)/r^beta {worst:.4f}; total below content/8 in {short}"


# -- 8: witness uniformity -------------------------------------------------------

def witness_uniformity():
    t0 = time.perf_counter()
    spec = SeriesSpec(-0.5, 0)
    w6 = divergence_witness(SLIT, spec, 6)
    w12 = divergence_witness(SLIT, spec, 12)
    elapsed = time.perf_counter() - t0
    ratio = w12.norm_bound_grid / w6.norm_bound_grid
    ok = ratio <= 1.2 and w12.value_at_zero.real > w6.value_at_zero.real and elapsed < 30.0
    return ok, (f"norm ratio {ratio:.4f}, Re value {w6.value_at_zero.real:.5f} -> "
                f"{w12.value_at_zero.real:.5f}, {elapsed:.2f}s")


# -- 9: partition -----------------------------------------------------------------

def partition_scenes():
    return {
        "segment": Scene(shapes=(Segment((0.1, 0.3), (0.9, 0.6)),)),
        "disc": Scene(shapes=(Disc((0.5, 0.5), 0.3),)),
        "two-scale": Scene(shapes=(DyadicShape(0, 0, 1), DyadicShape(5, 5, 3))),
    }


def partition_of_unity():
    nk = {}
    sum_err, viol = 0.0, 0
    for name, scene in partition_scenes().items():
        for depth in (3, 6):
            E = rasterize(scene, depth)
            res = build_partition(E.maximal_blocks(), E, k=3)
            nk[(name, depth)] = res.max_nk
            sum_err = max(sum_err, res.sum_error_max)
            viol += res.support_violations
    n3 = max(v for (_, d), v in nk.items() if d == 3)
    n6 = max(v for (_, d), v in nk.items() if d == 6)
    ok = sum_err <= 1e-9 and viol == 0 and n6 <= 1.5 * n3
    return ok, f"max |sum - 1| {sum_err:.2e}, support violations {viol}, max N3 depth6/depth3 {n6 / n3:.4f}"


# -- 10: smooth-function algebra -------------------------------------------------

def _bump(cx, cy, scale):
    return lambda X, Y: RHO(np.hypot(X - cx, Y - cy) / scale)


def _tess_atom(m, i, j):
    return lambda X, Y: psi_1d(i, m, X) * psi_1d(j, m, Y)


def smooth_corpus():
    return [_bump(0.013, -0.021, 1.0), _bump(0.3, 0.1, 0.5), _bump(-0.2, 0.25, 0.8),
            _tess_atom(1, 0, 0), _tess_atom(2, 1, 0), _tess_atom(1, -1, 0)]


def _on_grid(fns, spacing=1.0 / 256, half=1.2):
    grids = []
    for f in fns:
        grids.append(GridFunction.sample(f, -half, half, -half, half, spacing))
    return grids


def smooth_algebra():
    rng = np.random.default_rng(SEED + 10)
    fns = smooth_corpus()
    grids = _on_grid(fns)
    notes = []
    # homogeneity with exactly representable multipliers
    homog = True
    for g in grids[:3]:
        for k in (1, 2, 3):
            base = nk_seminorm(g, k).value
            for kappa in (0.5, 2.0, 8.0):
                homog &= nk_seminorm(g * kappa, k).value == kappa * base
    notes.append(f"homogeneity exact {homog}")
    # submultiplicativity
    worst = 0.0
    for _ in range(12):
        i, j = rng.choice(len(grids), 2, replace=False)
        k = int(rng.integers(1, 4))
        prod = grids[i] * grids[j]
        if not np.any(prod.values):
            continue
        lhs = nk_seminorm(prod, k).value
        rhs = 2 ** k * nk_seminorm(grids[i], k).value * nk_seminorm(grids[j], k).value
        worst = max(worst, lhs / rhs)
    sub = worst <= 1.05
    notes.append(f"N_k(fg)/(2^k N_k(f) N_k(g)) max {worst:.3g}")
    # scale invariance: each dilation gets its own cell count and an off-lattice centre,
    # so no two samplings coincide; ~1000+ cells per diameter resolve the rho band
    spread = 0.0
    for k in (1, 2):
        vals = []
        for i, r in enumerate((1.0, 0.25, 0.5, 2.0, 4.0)):
            h = (1.5 / r) / (1100 + 61 * i)
            f = _bump(0.3 * h, -0.45 * h, 1.0 / r)
            half = 0.8 / r
            vals.append(nk_seminorm(GridFunction.sample(f, -half, half, -half, half, h), k).value)
        spread = max(spread, max(abs(v / vals[0] - 1) for v in vals))
    scale = spread <= 0.01
    notes.append(f"scale spread {spread:.2e}")
    # pinchers rho(n|x - b|): library sampler plus independent off-lattice samplings
    b = complex(0.0123, -0.0311)
    n2 = []
    for i, n in enumerate((1, 2, 4, 8)):
        h = (1.5 / n) / (1100 + 83 * i)
        f = _bump(b.real, b.imag, 1.0 / n)
        half = 0.8 / n
        g = GridFunction.sample(f, b.real - half - 0.3 * h, b.real + half, b.imag - half - 0.7 * h,
                                b.imag + half, h)
        n2.append(nk_seminorm(g, 2).value)
    std = [nk_seminorm(standard_pincher(b, n), 2).value for n in (1, 2, 4, 8)]
    pinch_spread = max(max(n2) / min(n2), max(std) / min(std), max(n2 + std) / min(n2 + std)) - 1
    pinch = pinch_spread <= 0.02
    notes.append(f"pincher N2 spread {pinch_spread:.2e}")
    return homog and sub and scale and pinch, "; ".join(notes)


# -- 11: Cauchy identities -------------------------------------------------------

def annulus_measure(n: int = 2, depth: int = 7) -> DiscreteMeasure:
    full = RasterSet.full(DyadicSquare(0, 0, 0), depth)
    raster = annulus_clip(full, Annulus(0j, n))
    return frostman(raster, 0.5)


def chi_grid(mu: DiscreteMeasure, b: complex, spacing: float) -> GridFunction:
    x0, y0 = mu.points.real.min(), mu.points.imag.min()
    x1, y1 = mu.points.real.max(), mu.points.imag.max()

    def f(X, Y):
        return 1.0 / (X + 1j * Y - b)

    return GridFunction.sample(f, x0, x1, y0, y1, spacing)


def cauchy_identities():
    mu = annulus_measure()
    leaf = 2.0 ** -7
    rng = np.random.default_rng(SEED + 11)
    worst = 0.0
    count = 0
    while count < 20:
        b = complex(rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2))
        if np.min(np.abs(mu.points - b)) < leaf:
            continue
        try:
            chi = chi_grid(mu, b, leaf)
        except ValueError:
            continue
        direct = complex(cauchy_transform(mu, b))
        paired = cauchy_eval_pairing(mu, b, chi)
        worst = max(worst, abs(direct - paired) / max(1.0, abs(direct)))
        count += 1
    # additivity of localization
    x0, y0 = mu.points.real.min(), mu.points.imag.min()
    span = max(mu.points.real.max() - x0, mu.points.imag.max() - y0)
    phi1 = GridFunction.sample(lambda X, Y: RHO(np.hypot(X - 0.3, Y - 0.2) / 0.4), x0, x0 + span,
                               y0, y0 + span, leaf)
    phi2 = GridFunction.sample(lambda X, Y: 0.5 * (1 + np.sin(7 * X) * np.cos(3 * Y)), x0, x0 + span,
                               y0, y0 + span, leaf)
    both = vitushkin_localize(mu, phi1 + phi2)
    parts = vitushkin_localize(mu, phi1).weights + vitushkin_localize(mu, phi2).weights
    mult_exact = np.array_equal(phi1.at(mu.points) + phi2.at(mu.points), (phi1 + phi2).at(mu.points))
    add_err = float(np.max(np.abs(both.weights - parts) / np.maximum(mu.weights, 1e-300)))
    ok = worst <= 1e-12 and mult_exact and add_err <= 4 * np.finfo(float).eps
    return ok, (f"20 points, max |pairing - transform| {worst:.2e}; localization multipliers add "
                f"exactly {mult_exact}, weight residual {add_err:.1e} (relative)")


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "slit threshold", slit_threshold),
    (2, "derivation order shift", derivation_shift),
    (3, "road-runner equivalence", roadrunner_equivalence),
    (4, "segment content and DP oracle", segment_content),
    (5, "comparison-constant bracket", comparison_bracket),
    (6, "delta norm at s = -2", delta_norm),
    (7, "Frostman growth and mass", frostman_growth),
    (8, "witness uniformity", witness_uniformity),
    (9, "partition of unity", partition_of_unity),
    (10, "smooth-function algebra", smooth_algebra),
    (11, "Cauchy identities", cauchy_identities),
]


def run_criterion(number: int) -> CriterionResult:
    _, name, fn = CRITERIA[number - 1]
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t)


def run_all(numbers=None) -> list[CriterionResult]:
    numbers = [c[0] for c in CRITERIA] if numbers is None else list(numbers)
    return [run_criterion(n) for n in numbers]
