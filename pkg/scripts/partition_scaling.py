"""Partition-of-unity statistics as the raster depth grows: atom count, N_k and sum error."""
import argparse
import time
from dataclasses import dataclass

from lipcap.geom import Disc, Scene, Segment, rasterize
from lipcap.partition import build_partition

SCENES = {
    "segment": Scene(shapes=(Segment((0.1, 0.3), (0.9, 0.6)),)),
    "disc": Scene(shapes=(Disc((0.5, 0.5), 0.3),)),
}


@dataclass
class ScalingConfig:
    scene: str = "segment"
    k: int = 3
    depths: str = "2,3,4,5,6"


def run(cfg: ScalingConfig):
    scene = SCENES[cfg.scene]
    print(f"depth atoms  maxN{cfg.k}       |sum-1|    tau grad  seconds")
    for depth in (int(d) for d in cfg.depths.split(",")):
        E = rasterize(scene, depth)
        t = time.perf_counter()
        res = build_partition(E.maximal_blocks(), E, k=cfg.k)
        s = res.summary()
        print(f"{depth:5d} {s['atomCount']:5d}  {res.max_nk:10.3f}  {s['sumErrorMax']:9.2e}  "
              f"{s['tauGradient']:8.3f}  {time.perf_counter() - t:7.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scene", choices=sorted(SCENES), default="segment")
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--depths", default="2,3,4,5,6")
    run(ScalingConfig(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
