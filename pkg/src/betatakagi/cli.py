"""Command-line entry point: ``python -m betatakagi <command> ...``.

Every command writes one JSON document (or a CSV table) to stdout or
``--out``.  Errors are written in the same place as a JSON object with an
``error`` field, and the process exits with the code of the error class
(2 for usage errors).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import __version__
from .beta_dynamics import BetaParam, GreedyDigits, bits_for_depth, digits_of, is_simple, point, synthesize
from .enclosure import Enclosure, format_mpfr, format_radius
from .errors import BetaTakagiError, DomainError, NotEnoughOnes
from .invariant_measure import build_density, density_csv, density_summary, digit_frequency, interval_measure
from .regularity import (
    holder_csv,
    holder_probe_multi,
    lemma2_check,
    lemma3_csv,
    lemma3_trace,
    lipschitz_statistic,
    probe_precision,
    witness_csv,
    witness_sequence,
)
from .stats import clt_report, clt_run, histogram_csv
from .takagi import batch_csv, batch_json, default_depth, evaluate, evaluate_batch, takagi_classical

SCHEMA_VERSION = 1
EXIT_INTERNAL = 1
EXIT_USAGE = 2
MIN_AUTO_BITS = 128
PROBE_BITS = 256  # precision of the throwaway base used to size a run


@dataclass(frozen=True)
class RunConfig:
    beta: str
    precision_bits: Optional[int]  # None: chosen from the command's depth
    depth: Optional[int]
    seed: int
    format: str
    out: Optional[str]
    workers: int
    mode: str

    def describe(self, precision_bits: int, depth: Optional[int]) -> dict:
        # workers and the output path never change results, so they are left out
        return {
            "beta": self.beta,
            "precision_bits": precision_bits,
            "depth": depth,
            "seed": self.seed,
        }


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_precision(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'auto'") from None


def _bits(cfg: RunConfig, depth: int) -> int:
    if cfg.precision_bits is not None:
        return cfg.precision_bits
    return max(MIN_AUTO_BITS, bits_for_depth(cfg.beta, depth))


def _base(cfg: RunConfig, bits: int) -> BetaParam:
    return BetaParam.parse(cfg.beta, bits)


def parse_x(base: BetaParam, text: str) -> Union[Enclosure, GreedyDigits]:
    """A point: decimal or fraction literal, or a digit list such as ``[1,0,1]``."""
    t = text.strip()
    if t.startswith("["):
        if not t.endswith("]"):
            raise DomainError(f"unterminated digit list {text!r}")
        body = t[1:-1].replace(",", " ").split()
        try:
            ds = [int(d) for d in body]
        except ValueError:
            raise DomainError(f"cannot parse digit list {text!r}") from None
        return GreedyDigits.from_user(base, ds)
    return point(base, t)


def _as_point(base: BetaParam, x) -> Enclosure:
    return synthesize(base, x) if isinstance(x, GreedyDigits) else x


# -- commands ----------------------------------------------------------------------


def cmd_digits(cfg: RunConfig, args) -> tuple[dict, str]:
    depth = cfg.depth or 32
    bits = _bits(cfg, depth)
    base = _base(cfg, bits)
    x = parse_x(base, args.x)
    if isinstance(x, GreedyDigits):
        gd = x
        xp = synthesize(base, gd)
        if gd.depth < depth:
            gd = GreedyDigits(base, gd.digits + (0,) * (depth - gd.depth), gd.source, True, True)
        else:
            gd = GreedyDigits(base, gd.digits[:depth], gd.source, gd.certified, gd.terminal)
    else:
        xp = x
        gd = digits_of(base, x, depth)
    simple = is_simple(base, xp, depth)
    result = {
        "x": format_mpfr(xp.value),
        "digits": str(gd),
        "certified": gd.certified,
        "source": gd.source.value,
        "simple": simple.answer.value,
        "simple_at": simple.n0,
    }
    rows = "n,digit\n" + "".join(f"{n},{d}\n" for n, d in enumerate(gd.digits, 1))
    return _doc("digits", cfg, bits, depth, result), rows


def _eval_setup(cfg: RunConfig):
    b0 = _base(cfg, cfg.precision_bits or PROBE_BITS)
    depth = cfg.depth or default_depth(b0, digit_frequency(b0))
    bits = _bits(cfg, depth)
    base = _base(cfg, bits)
    return base, depth, bits, digit_frequency(base)


def cmd_eval(cfg: RunConfig, args) -> tuple[dict, str]:
    base, depth, bits, M = _eval_setup(cfg)
    x = parse_x(base, args.x)
    ev = evaluate(base, x, M, depth)
    result = ev.to_dict()
    result["M"] = M.to_dict()
    if base.is_two:
        cl = takagi_classical(ev.x, depth, bits)
        delta = abs(ev.value_def - cl)
        result["classical"] = cl.to_dict()
        result["classical_delta"] = format_mpfr(delta.value, 20)
        result["classical_agree"] = ev.value_def.overlaps(cl)
    table = "x,value,radius,value_lemma1,radius_lemma1\n" + ",".join(
        [
            format_mpfr(ev.x.value),
            format_mpfr(ev.value_def.value),
            format_radius(ev.value_def.radius),
            format_mpfr(ev.value_lemma1.value),
            format_radius(ev.value_lemma1.radius),
        ]
    ) + "\n"
    return _doc("eval", cfg, bits, depth, result), table


def cmd_curve(cfg: RunConfig, args) -> tuple[dict, str]:
    if args.points < 2:
        raise DomainError("--points must be >= 2")
    base, depth, bits, M = _eval_setup(cfg)
    xs = [point(base, Fraction(k, args.points - 1)) for k in range(args.points)]
    evals = evaluate_batch(base, xs, M, depth, cfg.workers)
    result = batch_json(base, M, evals)
    if base.is_two:
        worst, agree = 0.0, True
        for e in evals:
            cl = takagi_classical(e.x, depth, bits)
            worst = max(worst, float(abs(e.value_def - cl).value))
            agree = agree and e.value_def.overlaps(cl)
        result["classical_max_delta"] = repr(worst)
        result["classical_agree"] = agree
    return _doc("curve", cfg, bits, depth, result), batch_csv(evals)


def cmd_measure(cfg: RunConfig, args) -> tuple[dict, str]:
    bits = cfg.precision_bits or 256
    base = _base(cfg, bits)
    D = build_density(base, cfg.depth)
    result = density_summary(D)
    if args.a is not None or args.b is not None:
        a = args.a if args.a is not None else "0"
        b = args.b if args.b is not None else "1"
        result["interval"] = {"a": a, "b": b, "measure": interval_measure(D, point(base, a), point(base, b)).to_dict()}
    return _doc("measure", cfg, bits, D.depth, result), density_csv(D)


def cmd_holder(cfg: RunConfig, args) -> tuple[dict, str]:
    alphas = [float(a) for a in args.alpha.split(",")]
    bits = cfg.precision_bits or max(MIN_AUTO_BITS, probe_precision(cfg.beta, args.delta_min))
    base = _base(cfg, bits)
    M = digit_frequency(base)
    reps = holder_probe_multi(
        base, M, parse_x(base, args.x), alphas, args.samples, args.delta_min, args.delta_max,
        cfg.seed, args.side, cfg.depth, cfg.workers,
    )
    result = {"reports": [r.to_dict() for r in reps]}
    return _doc("holder", cfg, bits, cfg.depth, result), "".join(
        (f"# alpha={r.alpha!r}\n" + holder_csv(r)) for r in reps
    )


def cmd_witness(cfg: RunConfig, args) -> tuple[dict, str]:
    n_max = args.n_max
    if cfg.depth is not None:
        attempts = [cfg.depth]
    else:
        # about (N+1)/M digits are needed; retry with larger budgets if the estimate is short
        b0 = _base(cfg, PROBE_BITS)
        est = math.ceil(2 * (n_max + 1) / float(digit_frequency(b0).value)) + 64
        attempts = [est, 4 * est, 16 * est]
    err = None
    for budget in attempts:
        bits = _bits(cfg, budget)
        base = _base(cfg, bits)
        M = digit_frequency(base)
        x = _as_point(base, parse_x(base, args.x))
        try:
            ws = witness_sequence(base, M, x, n_max, budget)
        except NotEnoughOnes as e:
            err = e
            continue
        result = ws.to_dict()
        if args.lipschitz_depth:
            lb = base if base.max_depth() >= args.lipschitz_depth else base.with_precision(
                bits_for_depth(cfg.beta, args.lipschitz_depth)
            )
            result["lipschitz"] = lipschitz_statistic(lb, digit_frequency(lb), x.exact, args.lipschitz_depth).to_dict()
            result["lipschitz"]["depth"] = args.lipschitz_depth
        return _doc("witness", cfg, bits, budget, result), witness_csv(ws)
    raise err


def cmd_clt(cfg: RunConfig, args) -> tuple[dict, str]:
    bits = cfg.precision_bits or (
        max(256, bits_for_depth(cfg.beta, args.n)) if cfg.mode == "certified" else 256
    )
    base = _base(cfg, bits)
    D = build_density(base)
    run = clt_run(base, D, args.n, args.m, cfg.seed, cfg.mode, cfg.workers)
    return _doc("clt", cfg, bits, None, clt_report(run)), histogram_csv(run)


def cmd_lemma2(cfg: RunConfig, args) -> tuple[dict, str]:
    bits = cfg.precision_bits or 1024
    base = _base(cfg, bits)
    depth = cfg.depth or base.max_depth()
    x = _as_point(base, parse_x(base, args.x))
    y = _as_point(base, parse_x(base, args.y))
    rep = lemma2_check(base, x, y, depth)
    d = rep.to_dict()
    table = "N,side,lhs,lhs_radius,rhs,rhs_radius,holds,certified\n" + ",".join(
        map(str, [
            rep.N, rep.side, format_mpfr(rep.lhs.value), format_radius(rep.lhs.radius),
            format_mpfr(rep.rhs.value), format_radius(rep.rhs.radius), int(rep.holds), int(rep.certified),
        ])
    ) + "\n"
    return _doc("lemma2", cfg, bits, depth, d), table


def cmd_lemma3(cfg: RunConfig, args) -> tuple[dict, str]:
    n_max = args.n_max
    bits = _bits(cfg, n_max)
    base = _base(cfg, bits)
    tr = lemma3_trace(base, _as_point(base, parse_x(base, args.x)), n_max)
    result = tr.summary()
    rows = []
    for n in sorted({k for k in (1, 10, 100, 1000, 10000, n_max) if k <= n_max}):
        r = tr.row(n)
        rows.append({
            "n": n,
            "log_tau": None if r.log_tau is None else r.log_tau.to_dict(),
            "log_one_minus": None if r.log_one_minus is None else r.log_one_minus.to_dict(),
        })
    result["checkpoints"] = rows
    result["events"] = [r.n for r in tr.rows if r.event_A or r.event_B]
    return _doc("lemma3", cfg, bits, n_max, result), lemma3_csv(tr)


COMMANDS = {
    "digits": cmd_digits,
    "eval": cmd_eval,
    "curve": cmd_curve,
    "measure": cmd_measure,
    "holder": cmd_holder,
    "witness": cmd_witness,
    "clt": cmd_clt,
    "lemma2": cmd_lemma2,
    "lemma3": cmd_lemma3,
}


# -- output ----------------------------------------------------------------------------


def _plain(v):
    """JSON-ready copy with floats as shortest round-trip decimal strings."""
    if isinstance(v, dict):
        return {str(k): _plain(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(w) for w in v]
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Enclosure):
        return v.to_dict()
    return v


def _doc(command: str, cfg: RunConfig, bits: int, depth: Optional[int], result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": cfg.describe(bits, depth),
        "mode": cfg.mode if command == "clt" else "certified",
        "result": result,
    }


def dumps(doc: dict) -> str:
    return json.dumps(_plain(doc), indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", required=True, help="decimal/fraction literal or a named base (golden, sqrt2, ...)")
    common.add_argument("--precision-bits", type=_parse_precision, default=None, metavar="BITS|auto")
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--workers", type=int, default=1)

    p = _Parser(prog="betatakagi", description="Beta-expansions and generalized Takagi functions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("digits", parents=[common], help="greedy digits of a point")
    s.add_argument("--x", required=True)
    s = sub.add_parser("eval", parents=[common], help="G_beta at a point by both series")
    s.add_argument("--x", required=True)
    s = sub.add_parser("curve", parents=[common], help="G_beta on a uniform grid")
    s.add_argument("--points", type=int, default=1024)
    s = sub.add_parser("measure", parents=[common], help="Parry density summary and interval measures")
    s.add_argument("--a", default=None)
    s.add_argument("--b", default=None)
    s = sub.add_parser("holder", parents=[common], help="Hölder quotient probe at a point")
    s.add_argument("--x", required=True)
    s.add_argument("--alpha", default="0.5", help="comma-separated exponents in (0, 1)")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--delta-min", type=float, default=1e-12)
    s.add_argument("--delta-max", type=float, default=1e-1)
    s.add_argument("--side", choices=("both", "left", "right"), default="both")
    s = sub.add_parser("witness", parents=[common], help="witness sequence and the divergence statistic")
    s.add_argument("--x", required=True)
    s.add_argument("--n-max", type=int, default=200)
    s.add_argument("--lipschitz-depth", type=int, default=None)
    s = sub.add_parser("clt", parents=[common], help="CLT run for the digit-1 indicator")
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--m", type=int, default=10_000)
    s.add_argument("--mode", choices=("certified", "fast"), default="fast")
    s = sub.add_parser("lemma2", parents=[common], help="separation inequality for a pair of points")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s = sub.add_parser("lemma3", parents=[common], help="normalized log series along an orbit")
    s.add_argument("--x", required=True)
    s.add_argument("--n-max", type=int, default=1000)
    return p


def _config(ns) -> RunConfig:
    if ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    return RunConfig(
        ns.beta, ns.precision_bits, ns.depth, ns.seed, ns.format, ns.out, ns.workers, getattr(ns, "mode", "certified")
    )


def _error_doc(command: Optional[str], err: dict) -> str:
    return dumps({"schema_version": SCHEMA_VERSION, "command": command, "error": err})


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _config(ns)
    except UsageError as e:
        sys.stderr.write(_error_doc(None, {"error": "usage", "message": str(e)}))
        return EXIT_USAGE
    try:
        doc, table = COMMANDS[ns.command](cfg, ns)
    except BetaTakagiError as e:
        _emit(_error_doc(ns.command, e.to_dict()), cfg.out)
        return e.exit_code
    _emit(dumps(doc) if cfg.format == "json" else table, cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
