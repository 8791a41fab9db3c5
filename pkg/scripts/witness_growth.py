"""Divergence witnesses: value at the origin keeps growing while the norm bound stays flat."""
import argparse
from dataclasses import dataclass

from lipcap.geom import ParametricDomain
from lipcap.wiener import SeriesSpec, divergence_witness


@dataclass
class WitnessConfig:
    kind: str = "slit"
    s: float = -0.5
    k: int = 0
    nmax: int = 12


def run(cfg: WitnessConfig):
    domain = ParametricDomain(cfg.kind, 0.5, 0.5, 0.25, 0.25)
    spec = SeriesSpec(cfg.s, cfg.k)
    print("N  Re g(0)     norm bound  min slack")
    for N in range(1, cfg.nmax + 1):
        w = divergence_witness(domain, spec, N)
        print(f"{N:<2d} {w.value_at_zero.real:10.6f}  {w.norm_bound_grid:10.6f}  "
              f"{min(w.soundness_slack()):8.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(WitnessConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    run(WitnessConfig(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
