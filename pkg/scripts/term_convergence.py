"""Raster series terms against the closed form as the raster depth grows.

For each relative depth (leaves per annulus root, a side-2^-n square) the ratio raster/closed is printed; it should
sit inside the dyadic comparison bracket and settle as the depth increases.
"""
import argparse
from dataclasses import dataclass

from lipcap.geom import ParametricDomain
from lipcap.wiener import SeriesSpec, closed_form_terms, series_terms


@dataclass
class TermConfig:
    kind: str = "slit"
    a0: float = 0.5
    q: float = 0.5
    c0: float = 0.0625
    p: float = 0.25
    s: float = -0.4
    nmax: int = 8
    depths: str = "4,6,8,10"


def run(cfg: TermConfig):
    domain = ParametricDomain(cfg.kind, cfg.a0, cfg.q, cfg.c0, cfg.p)
    spec = SeriesSpec(cfg.s)
    exact = dict(closed_form_terms(domain, spec, cfg.nmax))
    lo, hi = 2.0 ** (-spec.beta - 2), 2.0 ** (spec.beta + 2)
    print(f"bracket [{lo:.4f}, {hi:.4f}]; a ratio of 0 means the obstacle is below leaf scale")
    print("depth " + " ".join(f"{n:>8d}" for n in range(1, cfg.nmax + 1)))
    for depth in (int(d) for d in cfg.depths.split(",")):
        rep = series_terms(domain, spec, cfg.nmax, depth=depth)
        ratios = [v / exact[n] for n, v in rep.terms]
        print(f"{depth:5d} " + " ".join(f"{r:8.4f}" for r in ratios))
    rep = series_terms(domain, spec, cfg.nmax)
    print("adapt " + " ".join(f"{v / exact[n]:8.4f}" for n, v in rep.terms))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(TermConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    run(TermConfig(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
