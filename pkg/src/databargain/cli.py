"""Command-line front end.

    databargain ahp --fixture paper5x5
    databargain quality --grades Excellent,VeryGood,Satisfactory,Fair --v1 150 --v2 150
    databargain utility --assumption 1 --demand 1 --seed 3
    databargain bargain --r-s 300 --r-b 800 --delta-s 0.5 --delta-eta-b 0.3 --p2 0.45 --alpha 0.2
    databargain simulate --assumption 1 --demand 1 --seeds 200
    databargain sweep --param eta --from 0 --to 0.5 --steps 11

Files go to ``--output-dir`` (default ``$DATABARGAIN_OUTPUT_DIR`` or ``./out``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import ahp, bargain, market, quality
from .config import ConfigError, parse_config

OUTPUT_ENV = "DATABARGAIN_OUTPUT_DIR"


def _out_dir(args) -> Path:
    path = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or "out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, payload: dict, rows_key: str | None = None) -> None:
    if args.format == "json" or rows_key is None:
        print(json.dumps(payload, indent=2))
        return
    rows = payload[rows_key]
    if rows:
        keys = list(rows[0])
        print(",".join(keys))
        for r in rows:
            print(",".join(str(r[k]) for k in keys))


def _overrides(args) -> dict:
    out = {}
    for key in ("seller_assumption", "buyer_demand", "oracle", "eta", "p1"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    return out


def cmd_ahp(args) -> int:
    if args.matrix:
        grid, kind = ahp.load_matrix(args.matrix), args.kind
    else:
        grid, kind = ahp.load_fixture(args.fixture), ahp.FIXTURES[args.fixture][1]
    if kind == "ratio":
        weights, report = ahp.weights_from_ratio(ahp.RatioMatrix(grid))
    else:
        weights, report = ahp.derive_weights(ahp.JudgmentMatrix(grid), args.base)
    payload = {
        "weights": [round(float(w), 4) for w in weights],
        "weights_2dp": [round(float(w), 2) for w in weights],
        **{k: v for k, v in dataclasses.asdict(report).items()},
    }
    _emit(args, payload)
    return 0


def cmd_quality(args) -> int:
    grades = [g for g in args.grades.split(",") if g.strip()]
    q = quality.QualityVector.of([_grade_token(g) for g in grades])
    weights = quality.QUALITY_WEIGHTS
    if args.weights:
        weights = tuple(float(x) for x in args.weights.split(","))
    res = quality.seller_reserve(args.v1, args.v2, q, weights)
    _emit(args, {"grades": [getattr(q, n).label for n in quality.INDICATORS],
                 "composite": quality.composite_score(q, weights),
                 "r0": res.r0, "rs": res.rs})
    return 0


def _grade_token(token: str):
    token = token.strip()
    try:
        return float(token)
    except ValueError:
        return token


def cmd_utility(args) -> int:
    cfg = parse_config(args.config, _overrides(args)).scenario
    scenario = market.build_scenario(cfg)
    xi = market.compute_utility(scenario)
    path = _out_dir(args) / "utility.csv"
    path.write_text(xi.to_csv())
    rows = [{"buyer": b, **{s: round(float(v), 6) for s, v in zip(xi.sellers, row)}}
            for b, row in zip(xi.buyers, xi.xi)]
    _emit(args, {"file": str(path), "utility": rows}, "utility")
    return 0


def cmd_bargain(args) -> int:
    base = parse_config(args.config).bargain
    changes = {k: getattr(args, k) for k in ("r_s", "r_b", "delta_s", "delta_eta_b", "p1", "p2",
                                             "alpha", "tau") if getattr(args, k) is not None}
    params = base.with_(**changes)
    res = bargain.equilibrium_price(params)
    payload = {"params": dataclasses.asdict(params), **dataclasses.asdict(res),
               "fixed_point": bargain.fixed_point_oracle(params)}
    _emit(args, payload)
    return 0


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config, _overrides(args)).scenario
    start = args.seed if args.seed is not None else (
        args.seed_start if args.seed_start is not None else cfg.seed)
    seeds = range(start, start + args.seeds)
    records = market.run_simulation(cfg, seeds, workers=args.workers)
    summary = market.aggregate(records)
    out = _out_dir(args)
    stem = f"a{cfg.seller_assumption}_d{cfg.buyer_demand}"
    (out / f"records_{stem}.csv").write_text(market.records_to_csv(records))
    (out / f"summary_{stem}.json").write_text(market.summary_to_json(summary, cfg, seeds))
    if not args.no_plots:
        from .plots import plot_summary
        plot_summary(summary, out / f"summary_{stem}.png",
                     f"Seller assumption {cfg.seller_assumption}, demand {cfg.buyer_demand}")
    rows = [{"id": pid, **{k: (round(v, 4) if isinstance(v, float) else v) for k, v in s.items()}}
            for pid, s in summary.items()]
    _emit(args, {"records": str(out / f"records_{stem}.csv"),
                 "ranking": market.seller_ranking(summary), "summary": rows}, "summary")
    return 0


def cmd_sweep(args) -> int:
    conf = parse_config(args.config)
    params = market.SWEEP_PARAMS if args.param == "all" else (args.param,)
    out = _out_dir(args)
    report = []
    for which in params:
        if args.start is not None or args.stop is not None:
            lo, hi = market.default_grid(which, 2, conf.bargain.p1)
            lo = lo if args.start is None else args.start
            hi = hi if args.stop is None else args.stop
            grid = np.linspace(lo, hi, args.steps).tolist()
        else:
            grid = market.default_grid(which, args.steps, conf.bargain.p1)
        rows = market.sweep(conf.bargain, which, grid, r0=conf.r0, delta_b=conf.delta_b)
        (out / f"sweep_{which}.csv").write_text(market.sweep_to_csv(rows))
        if not args.no_plots:
            from .plots import plot_sweep
            plot_sweep(rows, out / f"sweep_{which}.png")
        seller_ok, buyer_ok = market.sweep_direction_ok(rows, which)
        report.append({"param": which, "points": len(rows),
                       "expected_seller_direction": market.EXPECTED_DIRECTION[which],
                       "seller_direction_ok": seller_ok, "buyer_direction_ok": buyer_ok,
                       "flagged": sum(bool(r.flag) for r in rows),
                       "file": str(out / f"sweep_{which}.csv")})
    _emit(args, {"sweeps": report}, "sweeps")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (scenario/bargain/sweep sections)")
    common.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or ./out)")
    common.add_argument("--seed", type=int, help="seed override")
    common.add_argument("--format", choices=("csv", "json"), default="json",
                        help="stdout format for tabular results")

    p = argparse.ArgumentParser(prog="databargain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("ahp", parents=[common], help="indicator weights and consistency")
    src = a.add_mutually_exclusive_group()
    src.add_argument("--fixture", choices=sorted(ahp.FIXTURES), default="paper5x5")
    src.add_argument("--matrix", help="file with a row-major grid")
    a.add_argument("--kind", choices=("judgments", "ratio"), default="judgments",
                   help="how to read --matrix")
    a.add_argument("--base", type=float, default=ahp.DEFAULT_BASE)
    a.set_defaults(func=cmd_ahp)

    q = sub.add_parser("quality", parents=[common], help="composite score and reserve price")
    q.add_argument("--grades", required=True,
                   help="accuracy,completeness,consistency,timeliness as labels or scores")
    q.add_argument("--v1", type=float, default=0.0, help="collection/processing cost")
    q.add_argument("--v2", type=float, default=0.0, help="minimum profit")
    q.add_argument("--weights", help="four comma-separated weights")
    q.set_defaults(func=cmd_quality)

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--assumption", dest="seller_assumption", type=int, choices=(1, 2, 3))
    scen.add_argument("--demand", dest="buyer_demand", type=int, choices=(1, 2))
    scen.add_argument("--oracle", choices=("synthetic", "trained"))
    scen.add_argument("--eta", type=float)
    scen.add_argument("--p1", type=float)

    u = sub.add_parser("utility", parents=[common, scen], help="buyer x seller utility matrix")
    u.set_defaults(func=cmd_utility)

    b = sub.add_parser("bargain", parents=[common], help="equilibrium price for explicit params")
    for flag in ("r-s", "r-b", "delta-s", "delta-eta-b", "p1", "p2", "alpha", "tau"):
        b.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float)
    b.set_defaults(func=cmd_bargain)

    s = sub.add_parser("simulate", parents=[common, scen], help="seeded market runs")
    s.add_argument("--seeds", type=int, default=200, help="number of seeds")
    s.add_argument("--seed-start", type=int, help="first seed (default: config seed, 0)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", parents=[common], help="single-parameter sensitivity curves")
    w.add_argument("--param", choices=(*market.SWEEP_PARAMS, "all"), default="all")
    w.add_argument("--from", dest="start", type=float)
    w.add_argument("--to", dest="stop", type=float)
    w.add_argument("--steps", type=int, default=11)
    w.add_argument("--no-plots", action="store_true")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"databargain {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
