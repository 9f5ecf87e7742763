"""CLT runs across bases: estimated variance, KS distance and the Green-Kubo reference."""

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path

from betatakagi.beta_dynamics import BetaParam
from betatakagi.invariant_measure import build_density
from betatakagi.stats import clt_report, clt_run, green_kubo


@dataclass
class CltConfig:
    bases: list = field(default_factory=lambda: ["2", "golden", "sqrt2", "tribonacci", "3/2"])
    n: int = 10_000
    m: int = 10_000
    seed: int = 1
    green_kubo_lags: int = 10
    workers: int = 1
    out: Path = Path("out/clt.json")


def run(cfg: CltConfig) -> list:
    rows = []
    for lab in cfg.bases:
        base = BetaParam.parse(lab, 256)
        D = build_density(base)
        rep = clt_report(clt_run(base, D, cfg.n, cfg.m, cfg.seed, workers=cfg.workers))
        gk, _ = green_kubo(D, cfg.green_kubo_lags)
        rep["green_kubo"] = gk.to_dict()
        rows.append(rep)
        print(f"{lab:>12}  v^2={rep['v_hat_squared']:.5f}  green-kubo={float(gk.value):.5f}  ks={rep['ks_distance']:.4f}")
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    cfg.out.write_text(json.dumps(rows, indent=1, default=str))
    return rows


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--bases", nargs="+", default=CltConfig().bases)
    p.add_argument("--n", type=int, default=CltConfig.n)
    p.add_argument("--m", type=int, default=CltConfig.m)
    p.add_argument("--seed", type=int, default=CltConfig.seed)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=CltConfig.out)
    a = p.parse_args()
    run(CltConfig(a.bases, a.n, a.m, a.seed, CltConfig.green_kubo_lags, a.workers, a.out))
