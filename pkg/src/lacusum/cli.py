"""Command-line entry point: ``lacusum <subcommand> ...``.

Output is JSON on stdout (12 significant digits, fixed key order) unless a
subcommand writes CSV.  Exit codes: 0 success, 1 when the result is a
Fails/Violated verdict, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import sys
from typing import List, Optional

from .catalog import INDICATORS, builtin_catalog, load_catalog
from .convergence import (DEFAULT_THRESHOLDS, SequenceSpec, Thresholds, f_density,
                          test_statistical, test_strong_cesaro, test_uniform_integrability)
from .counterexamples import (build_reciproco_sequence, build_sember_gap_sequence,
                              build_th3_sequence, inverse_k)
from .errors import LacusumError
from .harness import Lab, run_suite, to_json, write_report
from .lacunary import ratio_profile
from .modulus import check_modulus_axioms, classify_compatibility, phi_estimate

SAMPLE_ROWS = 2000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(s: str) -> List[float]:
    try:
        return [float(p) for p in s.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _int(s: str) -> int:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--catalog", help="extra catalog file (key=value blocks)")
    common.add_argument("--holds", type=float, default=DEFAULT_THRESHOLDS.holds)
    common.add_argument("--fails", type=float, default=DEFAULT_THRESHOLDS.fails)
    common.add_argument("--threads", type=int, default=1)

    p = _Parser(prog="lacusum", description="Modulated statistical and Cesaro convergence "
                "along lacunary sequences.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    mod = sub.add_parser("modulus", help="modulus axioms and compatibility")
    msub = mod.add_subparsers(dest="action", parser_class=_Parser)
    c = msub.add_parser("check", parents=[common])
    c.add_argument("--name", required=True)
    c.add_argument("--grid-max", type=float, default=1e6)
    c.add_argument("--grid-points", type=_int, default=200)
    c.add_argument("--seed", type=_int, default=0)
    c = msub.add_parser("phi", parents=[common])
    c.add_argument("--name", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--theta")
    c.add_argument("--horizon", type=_int, default=10**6)
    c = msub.add_parser("classify", parents=[common])
    c.add_argument("--name", required=True)
    c.add_argument("--eps-grid", type=_floats, default=[0.1, 0.01, 0.001, 0.0001])
    c.add_argument("--theta")
    c.add_argument("--horizon", type=_int, default=10**6)

    lac = sub.add_parser("lacunary", help="lacunary sequence statistics")
    lsub = lac.add_subparsers(dest="action", parser_class=_Parser)
    c = lsub.add_parser("info", parents=[common])
    c.add_argument("--theta", required=True)
    c.add_argument("--blocks", type=_int, default=100)

    c = sub.add_parser("density", parents=[common], help="f-density of a built-in set")
    c.add_argument("--set", required=True, choices=sorted(INDICATORS))
    c.add_argument("--modulus", default="identity")
    c.add_argument("--theta")
    c.add_argument("--horizon", type=_int, default=10**6)

    c = sub.add_parser("converge", parents=[common], help="membership verdict")
    c.add_argument("--seq", required=True)
    c.add_argument("--method", required=True, choices=["stat", "cesaro"])
    c.add_argument("--modulus", default="identity")
    c.add_argument("--theta")
    c.add_argument("--horizon", type=_int, default=10**6)
    c.add_argument("--limit", type=float)
    c.add_argument("--format", choices=["json", "csv"], default="json")

    c = sub.add_parser("integrable", parents=[common], help="lacunary uniform integrability")
    c.add_argument("--seq", required=True)
    c.add_argument("--theta", required=True)
    c.add_argument("--mgrid", type=_floats, default=[4.0, 16.0, 64.0, 256.0])
    c.add_argument("--blocks", type=_int, default=20)
    c.add_argument("--raw", action="store_true", help="do not divide block mass by h_r")

    c = sub.add_parser("counterexample", parents=[common], help="separating sequences")
    c.add_argument("--kind", required=True, choices=["reciproco", "th3", "sember"])
    c.add_argument("--modulus", default="log1p")
    c.add_argument("--theta", required=True)
    c.add_argument("--epsk", default="inv_k", choices=["inv_k"])
    c.add_argument("--K", type=_int, default=5)
    c.add_argument("--x0", type=float, default=1.0)
    c.add_argument("--J", type=_int, default=4)
    c.add_argument("--out", required=True, help="CSV file for the sampled sequence")

    har = sub.add_parser("harness", help="theorem suite")
    hsub = har.add_subparsers(dest="action", parser_class=_Parser)
    c = hsub.add_parser("run", parents=[common])
    c.add_argument("--config", help="config file; default runs every law on the catalog")
    c.add_argument("--out", required=True)
    return p


def _catalog(args):
    cat = builtin_catalog()
    if args.catalog:
        with open(args.catalog) as fh:
            cat = load_catalog(fh.read(), cat)
    return cat


def _thresholds(args) -> Thresholds:
    return Thresholds(holds=args.holds, fails=args.fails)


def _emit(obj) -> None:
    sys.stdout.write(to_json(obj) + "\n")


def _modulus(args) -> int:
    cat = _catalog(args)
    f = cat.modulus(args.name)
    theta = cat.theta(args.theta) if getattr(args, "theta", None) else None
    if args.action == "check":
        rep = check_modulus_axioms(f, args.grid_max, args.grid_points, seed=args.seed)
        _emit({**rep.as_dict(), "all_ok": rep.all_ok})
        return 0 if rep.all_ok else 1
    if args.action == "phi":
        est = phi_estimate(f, args.eps, args.horizon, theta)
        d = est.as_dict()
        d["name"] = f.name
        d["verdict"] = None
        _emit(d)
        return 0
    cls = classify_compatibility(f, args.eps_grid, args.horizon, theta)
    _emit({"name": f.name, **cls.as_dict()})
    return 0


def _lacunary(args) -> int:
    theta = _catalog(args).theta(args.theta)
    _emit(ratio_profile(theta, args.blocks).as_dict())
    return 0


def _density(args) -> int:
    cat = _catalog(args)
    f = cat.modulus(args.modulus)
    theta = cat.theta(args.theta) if args.theta else None
    est = f_density(f, INDICATORS[args.set], args.horizon, theta, _thresholds(args))
    _emit({"set": args.set, "modulus": f.name, "theta": args.theta, "value": est.value,
           "plateau": est.plateau, "horizon": est.horizon})
    return 0


def _seq(cat, name: str, limit: Optional[float]) -> SequenceSpec:
    seq = cat.sequence(name)
    if limit is not None:
        seq = SequenceSpec(seq.name, limit, values=seq.values, segments=seq.segments)
    return seq


def _converge(args) -> int:
    cat = _catalog(args)
    f = cat.modulus(args.modulus)
    theta = cat.theta(args.theta) if args.theta else None
    seq = _seq(cat, args.seq, args.limit)
    test = test_statistical if args.method == "stat" else test_strong_cesaro
    v = test(seq, f, theta, args.horizon, _thresholds(args))
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["estimate", "checkpoint", "value"])
        for k, e in v.estimates.items():
            for c, val in e.trajectory:
                w.writerow([k, c, f"{val:.12g}"])
    else:
        _emit({"sequence": seq.name, "limit": seq.limit, "modulus": f.name,
               "theta": args.theta, "horizon": args.horizon, **v.as_dict(trajectories=True)})
    return 1 if v.fails else 0


def _integrable(args) -> int:
    cat = _catalog(args)
    rep = test_uniform_integrability(cat.sequence(args.seq), cat.theta(args.theta), args.mgrid,
                                     args.blocks, not args.raw, _thresholds(args))
    _emit({"sequence": args.seq, "theta": args.theta, "blocks": args.blocks, **rep.as_dict()})
    return 1 if rep.verdict.fails else 0


def _sample_indices(w) -> List[int]:
    """Every index of each segment's ends and neighbours, plus the first terms."""
    idx = set(range(1, 101))
    for a, b, _ in w.seq.segments:
        idx.update({a - 1, a, b, b + 1})
    return sorted(i for i in idx if i >= 1)[:SAMPLE_ROWS]


def _counterexample(args) -> int:
    cat = _catalog(args)
    theta = cat.theta(args.theta)
    if args.kind == "sember":
        w = build_sember_gap_sequence(theta, args.x0, args.J)
    else:
        build = build_reciproco_sequence if args.kind == "reciproco" else build_th3_sequence
        w = build(cat.modulus(args.modulus), theta, inverse_k, args.K)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "x_n"])
        for n in _sample_indices(w):
            wr.writerow([n, f"{w.seq.at(n):.12g}"])
    d = w.witness_data()
    d["segments"] = [list(s) for s in w.seq.segments]
    d["csv"] = args.out
    _emit(d)
    return 0


def _harness(args) -> int:
    config = None
    if args.config:
        with open(args.config) as fh:
            config = fh.read()
    lab = Lab(_catalog(args), _thresholds(args))
    rep = run_suite(config if config is not None else "law=*\n", threads=max(1, args.threads),
                    lab=lab)
    write_report(rep, args.out)
    _emit({"out": args.out, **rep.as_dict()["header"]})
    return 1 if rep.violated else 0


HANDLERS = {
    "modulus": _modulus,
    "lacunary": _lacunary,
    "density": _density,
    "converge": _converge,
    "integrable": _integrable,
    "counterexample": _counterexample,
    "harness": _harness,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.cmd is None or (args.cmd in ("modulus", "lacunary", "harness")
                                and args.action is None):
            parser.print_help(sys.stderr)
            return 2
        return HANDLERS[args.cmd](args)
    except UsageError as e:
        sys.stderr.write(f"lacusum: error: {e}\n")
        return 2
    except (LacusumError, OSError) as e:
        sys.stderr.write(f"lacusum: {type(e).__name__}: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
