"""Poisson and Cauchy transforms of discrete measures.

Sign convention for the Cauchy pairing: the Cauchy transform is convolution with
1/(pi z), so at a point b off the support

    C(mu)(b) = sum_i w_i / (pi (b - p_i)) = -<chi / pi, mu>   with chi(z) = 1/(z - b).

`cauchy_eval_pairing` takes chi in the 1/(z - b) form and applies the minus sign;
this is the normative convention, pinned by the identity test against
`cauchy_transform`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Config
from .errors import (BInSupport, ChiMismatchOnSupport, GridInvalid, NonpositiveT,
                     PhiDomainMismatch, TooCloseToSupport, UnsupportedSmoothness)
from .measures import DiscreteMeasure
from .smoothfn import GridFunction


def poisson_kernel(z, t):
    """P_t(z) = t / (pi (t^2 + |z|^2)^(3/2))."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonpositiveT("Poisson kernel needs t > 0")
    z2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    return t / (np.pi * (t * t + z2) ** 1.5)


def poisson_transform(mu: DiscreteMeasure, z, t):
    """(P_t * mu)(z) = sum_i w_i P_t(z - p_i); broadcasts over z and t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonpositiveT("Poisson transform needs t > 0")
    z = np.asarray(z, dtype=complex)
    if len(mu) == 0:
        return np.zeros(np.broadcast(z, t).shape)
    d2 = np.abs(z[..., None] - mu.points) ** 2
    tt = t[..., None]
    return (mu.weights * tt / (np.pi * (tt * tt + d2) ** 1.5)).sum(axis=-1)


@dataclass(frozen=True)
class PoissonGridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nz: int = 64
    t_min: float = 2.0 ** -16
    t_max: float = 4.0
    nt: int = 48
    include_atoms: bool = True

    def __post_init__(self):
        if not (self.t_min > 0 and self.t_max > self.t_min and self.nt >= 2):
            raise GridInvalid("need 0 < t_min < t_max and at least two t values")
        if not (self.xmax > self.xmin and self.ymax > self.ymin and self.nz >= 2):
            raise GridInvalid("z-box must have positive extent and spacing")

    @property
    def spacing(self) -> float:
        return (self.xmax - self.xmin) / (self.nz - 1)

    def z_points(self) -> np.ndarray:
        xs = np.linspace(self.xmin, self.xmax, self.nz)
        ys = np.linspace(self.ymin, self.ymax, self.nz)
        X, Y = np.meshgrid(xs, ys)
        return (X + 1j * Y).ravel()

    def t_values(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.nt)

    def dilated(self, r: float) -> "PoissonGridSpec":
        """Grid for f o A, A(z) = r z: every length divided by r."""
        return PoissonGridSpec(self.xmin / r, self.xmax / r, self.ymin / r, self.ymax / r,
                               self.nz, self.t_min / r, self.t_max / r, self.nt, self.include_atoms)

    @classmethod
    def around(cls, mu: DiscreteMeasure, config: Optional[Config] = None) -> "PoissonGridSpec":
        """Default grid: the atoms' bounding box dilated 4x about its centre (unit box for a point)."""
        cfg = config or Config()
        if len(mu):
            x0, x1 = mu.points.real.min(), mu.points.real.max()
            y0, y1 = mu.points.imag.min(), mu.points.imag.max()
        else:
            x0 = x1 = y0 = y1 = 0.0
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        half = 2.0 * max(x1 - x0, y1 - y0)
        if half == 0:
            half = 1.0
        return cls(cx - half, cx + half, cy - half, cy + half, cfg.poisson_nz,
                   cfg.poisson_tmin, cfg.poisson_tmax, cfg.poisson_nt)


@dataclass
class TsNormEstimate:
    s: float
    value: float
    attaining_point: Optional[tuple]
    little_o: float
    sup_profile: np.ndarray

    @property
    def attained_at_tmin(self) -> bool:
        return self.attaining_point is not None and self.attaining_point[1] == self.sup_profile[0, 0]

    def to_dict(self) -> dict:
        ap = None
        if self.attaining_point is not None:
            z, t = self.attaining_point
            ap = {"z": [z.real, z.imag], "t": t}
        return {"s": self.s, "value": self.value, "attainingPoint": ap, "littleO": self.little_o,
                "attainedAtTmin": self.attained_at_tmin}


def _sup_over_z(mu: DiscreteMeasure, zs: np.ndarray, ts: np.ndarray, budget: int = 4_000_000):
    """max_z |P_t * mu(z)| and its argmax for each t."""
    best = np.zeros(len(ts))
    arg = np.zeros(len(ts), dtype=np.int64)
    n_atoms = max(len(mu), 1)
    chunk = max(1, budget // n_atoms)
    for start in range(0, len(zs), chunk):
        z = zs[start:start + chunk]
        d2 = np.abs(z[:, None] - mu.points[None, :]) ** 2
        for k, t in enumerate(ts):
            vals = (mu.weights * (t / (np.pi * (t * t + d2) ** 1.5))).sum(axis=1)
            i = int(np.argmax(vals))
            if vals[i] > best[k]:
                best[k], arg[k] = vals[i], start + i
    return best, arg


def ts_norm_estimate(mu: DiscreteMeasure, s: float,
                     grid: Optional[PoissonGridSpec] = None) -> TsNormEstimate:
    """Grid lower bound for sup t^(-s) |P_t * mu(z)|, plus a little-o slope diagnostic.

    ``little_o`` is the least-squares slope of log(t^(-s) sup_z |F|) against log t over
    the three smallest decades of the t-grid: near 0 means O(t^s) but not o(t^s),
    positive means decay (C_s-like), negative means growth toward t_min.
    """
    if s >= 0:
        raise UnsupportedSmoothness("only s < 0 is implemented for atomic measures")
    grid = PoissonGridSpec.around(mu) if grid is None else grid
    ts = grid.t_values()
    if len(mu) == 0 or mu.total == 0:
        prof = np.stack([ts, np.zeros_like(ts)])
        return TsNormEstimate(s, 0.0, None, 0.0, prof)
    zs = grid.z_points()
    if grid.include_atoms:
        zs = np.concatenate([zs, mu.points])
    sup, arg = _sup_over_z(mu, zs, ts)
    scaled = ts ** (-s) * sup
    k = int(np.argmax(scaled))
    window = ts <= grid.t_min * 1000
    if window.sum() < 2:
        window = np.arange(len(ts)) < 2
    with np.errstate(divide="ignore"):
        ly = np.log(scaled[window])
    slope = float(np.polyfit(np.log(ts[window]), ly, 1)[0]) if np.all(np.isfinite(ly)) else float("nan")
    return TsNormEstimate(s, float(scaled[k]), (complex(zs[arg[k]]), float(ts[k])), slope,
                          np.stack([ts, scaled]))


def cauchy_transform(mu: DiscreteMeasure, z, exclusion: float = 0.0):
    """C(mu)(z) = sum_i w_i / (pi (z - p_i)).

    Raises TooCloseToSupport when z lies within `exclusion` of an atom of positive
    weight (or on one).
    """
    z = np.asarray(z, dtype=complex)
    if len(mu) == 0:
        return np.zeros(z.shape, dtype=complex)[()]
    live = mu.weights > 0
    d = np.abs(z[..., None] - mu.points[live])
    if live.any():
        flat = d.reshape(-1, d.shape[-1])
        near = flat.min(axis=1)
        worst = int(np.argmin(near))
        if near[worst] <= exclusion or near[worst] == 0:
            atom = mu.points[live][int(np.argmin(flat[worst]))]
            raise TooCloseToSupport(f"evaluation point within {near[worst]:.3g} of atom {atom}",
                                    nearest=complex(atom), distance=float(near[worst]))
    return (mu.weights / (np.pi * (z[..., None] - mu.points))).sum(axis=-1)


def cauchy_eval_pairing(mu: DiscreteMeasure, b: complex, chi: GridFunction,
                        tol: float = 1e-9) -> complex:
    """C(mu)(b) evaluated as a pairing with a test function chi = 1/(z - b) near the support."""
    b = complex(b)
    if len(mu) == 0:
        return 0j
    live = mu.weights > 0
    pts = mu.points[live]
    if np.any(pts == b):
        raise BInSupport(f"b = {b} carries an atom")
    try:
        vals = chi.at(pts)
    except PhiDomainMismatch as exc:
        raise ChiMismatchOnSupport(str(exc)) from exc
    expected = 1.0 / (pts - b)
    err = np.abs(vals - expected)
    if np.any(err > tol * np.maximum(1.0, np.abs(expected))):
        raise ChiMismatchOnSupport(f"chi differs from 1/(z - b) by {err.max():.3g} on the support")
    return complex(-(mu.weights[live] * vals).sum() / np.pi)


def vitushkin_localize(mu: DiscreteMeasure, phi: GridFunction) -> DiscreteMeasure:
    """The measure phi * mu; its Cauchy transform is the localized function T_phi(C mu)."""
    if len(mu) == 0:
        return mu
    vals = phi.at(mu.points)
    if np.iscomplexobj(vals):
        raise PhiDomainMismatch("localizing function must be real")
    return mu.reweight(vals)
