import os
from dataclasses import dataclass, field

HARD_DEPTH_CAP = 16


def _env_depth_cap(default=14):
    raw = os.environ.get("LIPCAP_DEPTH_CAP")
    if raw is None:
        return default
    cap = int(raw)
    if not 1 <= cap <= HARD_DEPTH_CAP:
        raise ValueError(f"LIPCAP_DEPTH_CAP must be in [1, {HARD_DEPTH_CAP}], got {cap}")
    return cap


@dataclass
class Config:
    depth_cap: int = field(default_factory=_env_depth_cap)
    poisson_nz: int = 64
    poisson_nt: int = 48
    poisson_tmin: float = 2.0 ** -16
    poisson_tmax: float = 4.0
    tolerances: dict = field(default_factory=lambda: {"chi": 1e-9, "partition_sum": 1e-9})
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.depth_cap <= HARD_DEPTH_CAP:
            raise ValueError(f"depth cap must be in [1, {HARD_DEPTH_CAP}]")
        if any(v <= 0 for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output_format must be json or csv")


def default_depth_cap():
    return _env_depth_cap()
