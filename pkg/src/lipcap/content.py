"""Dyadic Hausdorff contents by quadtree dynamic programming.

The optimal dyadic cover of a raster obeys

    cost(S) = h(side S)                              if S is an occupied leaf
    cost(S) = min(h(side S), sum of cost(children))  otherwise

with empty squares costing nothing.  Covers are restricted to dyadic subsquares
of the raster's root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import default_depth_cap
from .errors import BetaOutOfRange, GaugeInvalid
from .geom import DyadicSquare, RasterSet, Scene, rasterize


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise BetaOutOfRange(f"beta must lie in (0, 1), got {beta}")
    return beta


# -- gauges -----------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    beta: float

    def __post_init__(self):
        check_beta(self.beta)

    def __call__(self, r):
        return np.power(r, self.beta)


@dataclass(frozen=True)
class Ladder:
    """h(r) = min(r^beta, 2^j r^(beta + eta)); equals r^beta above the crossover 2^(-j/eta)."""

    beta: float
    eta: float
    j: float

    def __post_init__(self):
        check_beta(self.beta)
        if self.eta <= 0:
            raise GaugeInvalid("ladder gauge needs eta > 0")

    @property
    def crossover(self) -> float:
        return 2.0 ** (-self.j / self.eta)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.minimum(np.power(r, self.beta), 2.0 ** self.j * np.power(r, self.beta + self.eta))


@dataclass(frozen=True)
class Tabulated:
    """Monotone gauge given by (r, h) samples, linearly interpolated and clamped at the ends."""

    points: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise GaugeInvalid("tabulated gauge needs at least one point")
        r, h = pts[:, 0], pts[:, 1]
        if np.any(r <= 0) or np.any(r > 1) or np.any(np.diff(r) <= 0):
            raise GaugeInvalid("tabulated radii must increase within (0, 1]")
        if np.any(h < 0) or np.any(np.diff(h) < 0) or not np.all(np.isfinite(h)):
            raise GaugeInvalid("tabulated gauge must be finite, nonnegative and nondecreasing")

    def __call__(self, r):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        return np.interp(r, pts[:, 0], pts[:, 1])


def parse_gauge(text: str, beta: float):
    """Parse ``power`` or ``ladder:eta=0.5,j=8`` into a gauge object."""
    kind, _, rest = text.partition(":")
    if kind == "power":
        return PowerLaw(beta)
    if kind == "ladder":
        opts = dict(kv.split("=") for kv in rest.split(",") if kv)
        return Ladder(beta, float(opts.get("eta", 0.5)), float(opts.get("j", 8)))
    raise GaugeInvalid(f"unknown gauge {text!r}")


# -- results ----------------------------------------------------------------

@dataclass
class ContentResult:
    value: float
    kind: str
    depth: Optional[int] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    ladder: list = field(default_factory=list)
    truncated: bool = False

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            assert self.lower <= self.upper

    def to_dict(self) -> dict:
        d = {"value": self.value, "kind": self.kind, "depth": self.depth, "truncated": self.truncated}
        if self.kind == "BallBracket":
            d["lower"], d["upper"] = self.lower, self.upper
        if self.kind == "LadderSequence":
            d["ladder"] = list(self.ladder)
        return d


# -- dynamic programme ------------------------------------------------------

@dataclass
class _Level:
    keys: np.ndarray
    cost: np.ndarray
    take: np.ndarray  # True where covering by the node itself is optimal


def _dp_levels(raster: RasterSet, h) -> list[_Level]:
    """Bottom-up DP; returns levels ordered leaf-first."""
    N = raster.depth
    side = raster.root.side
    keys = raster.keys()
    cost = np.full(len(keys), float(h(side * 2.0 ** -N)))
    levels = [_Level(keys, cost, np.ones(len(keys), bool))]
    for level in range(N - 1, -1, -1):
        child = levels[-1].keys
        width = level + 1
        ci, cj = child >> width, child & ((1 << width) - 1)
        parent = ((ci >> 1) << level) | (cj >> 1)
        uniq, inv = np.unique(parent, return_inverse=True)
        below = np.bincount(inv, weights=levels[-1].cost, minlength=len(uniq))
        own = float(h(side * 2.0 ** -level))
        take = own <= below
        levels.append(_Level(uniq, np.where(take, own, below), take))
    return levels


def _gauge_dp(raster: RasterSet, h) -> float:
    if raster.is_empty:
        return 0.0
    return float(_dp_levels(raster, h)[-1].cost[0])


def dyadic_content(raster: RasterSet, beta: float) -> ContentResult:
    """Exact beta-dimensional dyadic content of the occupied-leaf union."""
    beta = check_beta(beta)
    return ContentResult(_gauge_dp(raster, PowerLaw(beta)), "DyadicExact", depth=raster.depth)


def gauge_content(raster: RasterSet, h) -> ContentResult:
    if not callable(h):
        raise GaugeInvalid(f"{h!r} is not a gauge")
    return ContentResult(_gauge_dp(raster, h), "GaugeDyadicExact", depth=raster.depth)


def optimal_cover(raster: RasterSet, h) -> list[DyadicSquare]:
    """A dyadic cover attaining the DP minimum (ties resolved toward the larger square)."""
    if isinstance(h, (int, float)):
        h = PowerLaw(h)
    if raster.is_empty:
        return []
    levels = _dp_levels(raster, h)[::-1]  # root first
    out = []
    expand = np.zeros(0, dtype=np.int64)
    root = raster.root
    for level, lv in enumerate(levels):
        if level == 0:
            live = np.ones(len(lv.keys), bool)
        else:
            pi, pj = lv.keys >> level, lv.keys & ((1 << level) - 1)
            live = np.isin(((pi >> 1) << (level - 1)) | (pj >> 1), expand)
        chosen = lv.keys[live & lv.take]
        for k in chosen:
            i, j = int(k) >> level, int(k) & ((1 << level) - 1)
            out.append(DyadicSquare((root.m << level) + i, (root.r << level) + j, root.n + level))
        expand = lv.keys[live & ~lv.take]
    return out


def ladder_schedule(eta: float, J: int) -> list[int]:
    return [math.ceil(4 * j / eta) for j in range(1, J + 1)]


def lower_content_estimate(scene: Scene, beta: float, eta: float, J: int,
                           depth_cap: Optional[int] = None) -> ContentResult:
    """Ladder approximation of the lower content: v_j = M_{h_j} at depth ceil(4j/eta).

    Depths beyond the cap are clamped and the result is flagged ``truncated``.
    """
    beta = check_beta(beta)
    if eta <= 0:
        raise GaugeInvalid("eta must be positive")
    cap = default_depth_cap() if depth_cap is None else depth_cap
    values, truncated, used = [], False, []
    for j, depth in enumerate(ladder_schedule(eta, J), start=1):
        if depth > cap:
            depth, truncated = cap, True
        raster = rasterize(scene, depth, depth_cap=cap)
        values.append(_gauge_dp(raster, Ladder(beta, eta, j)))
        used.append(depth)
    return ContentResult(max(values) if values else 0.0, "LadderSequence",
                         depth=max(used) if used else None, ladder=values, truncated=truncated)


def lower_content_raster(raster: RasterSet, beta: float, eta: float = 0.5,
                         J: Optional[int] = None) -> ContentResult:
    """Ladder estimate on a fixed raster: max_j M_{h_j} over the rungs the depth resolves."""
    beta = check_beta(beta)
    if J is None:
        J = max(1, int(raster.depth * eta // 4))
    values = [_gauge_dp(raster, Ladder(beta, eta, j)) for j in range(1, J + 1)]
    return ContentResult(max(values), "LadderSequence", depth=raster.depth, ladder=values)


def ball_bracket(raster: RasterSet, beta: float) -> ContentResult:
    """Bracket for the ball content from M^b <= 2^(b/2) M2^b and M2^b <= 2^(b+2) M^b."""
    beta = check_beta(beta)
    m2 = _gauge_dp(raster, PowerLaw(beta))
    return ContentResult(m2, "BallBracket", depth=raster.depth,
                         lower=2.0 ** (-beta - 2) * m2, upper=2.0 ** (beta / 2) * m2)
