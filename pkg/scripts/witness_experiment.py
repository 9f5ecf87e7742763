"""Trace the witness statistic l(N) - N/M along random orbits and report its running maximum by depth."""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

from betatakagi.beta_dynamics import BetaParam, bits_for_depth, random_point
from betatakagi.invariant_measure import digit_frequency
from betatakagi.regularity import lipschitz_statistic
from betatakagi.rng import stream

TAG = 107


@dataclass
class WitnessConfig:
    bases: list = field(default_factory=lambda: ["2", "golden"])
    seeds: int = 100
    depths: list = field(default_factory=lambda: [500, 1000, 2000, 5000])
    seed: int = 1
    out: Path = Path("out/witness_maxima.csv")


def run(cfg: WitnessConfig) -> None:
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beta", "index", *[f"max_{d}" for d in cfg.depths]])
        for lab in cfg.bases:
            base = BetaParam.parse(lab, bits_for_depth(lab, max(cfg.depths)))
            M = digit_frequency(base)
            for i in range(cfg.seeds):
                x = random_point(base, stream(cfg.seed, i, TAG))
                w.writerow([lab, i, *[repr(float(lipschitz_statistic(base, M, x, d).max_stat.value)) for d in cfg.depths]])
    print(f"wrote {cfg.out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--bases", nargs="+", default=WitnessConfig().bases)
    p.add_argument("--seeds", type=int, default=WitnessConfig.seeds)
    p.add_argument("--out", type=Path, default=WitnessConfig.out)
    a = p.parse_args()
    run(WitnessConfig(a.bases, a.seeds, out=a.out))
