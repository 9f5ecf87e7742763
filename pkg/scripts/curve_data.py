"""Write G_beta on a uniform grid for several bases, one CSV per base, for external plotting."""

import argparse
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from betatakagi.beta_dynamics import BetaParam, point
from betatakagi.invariant_measure import digit_frequency
from betatakagi.takagi import batch_csv, evaluate_batch


@dataclass
class CurveConfig:
    bases: list = field(default_factory=lambda: ["2", "golden", "sqrt2", "tribonacci", "3/2"])
    points: int = 2049
    precision_bits: int = 256
    workers: int = 1
    out_dir: Path = Path("out/curves")


def run(cfg: CurveConfig) -> None:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for lab in cfg.bases:
        base = BetaParam.parse(lab, cfg.precision_bits)
        M = digit_frequency(base)
        xs = [point(base, Fraction(i, cfg.points - 1)) for i in range(cfg.points)]
        evals = evaluate_batch(base, xs, M, workers=cfg.workers)
        path = cfg.out_dir / f"curve_{lab.replace('/', '_')}.csv"
        path.write_text(batch_csv(evals))
        print(f"{lab}: {len(evals)} points -> {path}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--bases", nargs="+", default=CurveConfig().bases)
    p.add_argument("--points", type=int, default=CurveConfig.points)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=CurveConfig.out_dir)
    a = p.parse_args()
    run(CurveConfig(a.bases, a.points, CurveConfig.precision_bits, a.workers, a.out_dir))
