"""Verdict tables for slit and road-runner domains over s and the derivative order k.

    python scripts/slit_sweep.py --a0 0.5 --q 0.5 --c0 0.25 --p 0.25 --kmax 2
"""
import argparse
from dataclasses import dataclass

import numpy as np

from lipcap.fileio import csv_text
from lipcap.geom import ParametricDomain
from lipcap.wiener import SeriesSpec, classify_parametric


@dataclass
class SweepConfig:
    a0: float = 0.5
    q: float = 0.5
    c0: float = 0.25
    p: float = 0.25
    s_min: float = -0.95
    s_max: float = -0.05
    step: float = 0.05
    kmax: int = 2


def sweep(cfg: SweepConfig):
    rows = []
    ss = np.round(np.arange(cfg.s_min, cfg.s_max + cfg.step / 2, cfg.step), 12)
    for kind in ("slit", "roadrunner"):
        domain = ParametricDomain(kind, cfg.a0, cfg.q, cfg.c0, cfg.p)
        for k in range(cfg.kmax + 1):
            for s in ss:
                rep = classify_parametric(domain, SeriesSpec(float(s), k))
                rows.append([kind, k, float(s), rep.verdict, float(rep.tail_model["ratio"]),
                             float(rep.dual_norm_estimate)])
    return rows


def thresholds(cfg: SweepConfig):
    """Predicted critical s per k: (k+1)(s+1) log2 p = log2 q."""
    return {k: np.log2(cfg.q) / ((k + 1) * np.log2(cfg.p)) - 1 for k in range(cfg.kmax + 1)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(SweepConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = SweepConfig(**vars(ap.parse_args()))
    print(csv_text(["domain", "k", "s", "verdict", "ratio", "sum"], sweep(cfg)), end="")
    for k, s in thresholds(cfg).items():
        print(f"# k={k}: converges for s > {s:.6f}")


if __name__ == "__main__":
    main()
