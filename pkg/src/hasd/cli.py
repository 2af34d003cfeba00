"""Command line interface: run, tune, bench, check-invariants, gen-instance.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .geometry import LpGeometry
from .harness import (BENCH_METHODS, BENCH_MU_VALUES, STEPSIZE_GRID,
                      ExperimentConfig, check_invariants, default_x0,
                      make_objective, run_bench, run_experiment, tune_method)
from .objectives import save_instance, smoothness_bound, solve_reference


def _parse_p(text: str) -> float:
    return math.inf if str(text).strip().lower() == "inf" else float(text)


def _parse_float_list(text: str):
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _parse_name_list(text: str):
    return tuple(tok.strip() for tok in str(text).split(",") if tok.strip())


# flag destinations that map straight onto ExperimentConfig fields
_CFG_FIELDS = ("objective", "n", "d", "mu", "alpha", "seed", "methods", "p",
               "iters", "grid", "stepsize", "out_dir", "check_invariants",
               "ref_path", "instance_path")


def _instance_flags(sp, with_config=True):
    if with_config:
        sp.add_argument("--config", metavar="FILE",
                        help="JSON file mirroring ExperimentConfig; "
                             "explicit flags override its entries")
    sp.add_argument("--objective", choices=["logsumexp", "softmax", "quadratic"])
    sp.add_argument("--n", type=int, help="number of affine pieces (logsumexp)")
    sp.add_argument("--d", type=int, help="dimension")
    sp.add_argument("--mu", type=float, help="l2 regularization weight")
    sp.add_argument("--alpha", type=float, help="softmax temperature")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--instance", dest="instance_path", metavar="FILE",
                    help="load a stored instance instead of generating one")
    sp.add_argument("--ref-optimum", dest="ref_path", metavar="FILE",
                    help="JSON file with a stored reference optimum (x, f)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hasd",
        description="Steepest-descent acceleration experiments: run methods, "
                    "tune stepsizes, reproduce the comparison bench, and "
                    "check the per-iteration invariants.")
    sub = ap.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="run the configured methods once each")
    _instance_flags(run_p)
    run_p.add_argument("--p", type=_parse_p, help='geometry exponent ("inf" ok)')
    run_p.add_argument("--iters", type=int)
    run_p.add_argument("--methods", type=_parse_name_list,
                       help="comma separated: hasd,gd,agd,lc,sd_p")
    run_p.add_argument("--stepsize", type=float,
                       help="fixed stepsize for every method (default: theory)")
    run_p.add_argument("--tune", action="store_true",
                       help="grid-tune each method before the recorded run")
    run_p.add_argument("--check-invariants", dest="check_invariants",
                       action="store_true",
                       help="count invariant violations during the runs")
    run_p.add_argument("--grid", type=_parse_float_list)
    run_p.add_argument("--out", dest="out_dir")

    tune_p = sub.add_parser("tune", help="report the best grid stepsize per method")
    _instance_flags(tune_p)
    tune_p.add_argument("--p", type=_parse_p)
    tune_p.add_argument("--iters", type=int)
    tune_p.add_argument("--methods", type=_parse_name_list)
    tune_p.add_argument("--grid", type=_parse_float_list)
    tune_p.add_argument("--out", dest="out_dir",
                        help="also write tune.json under this directory")

    bench_p = sub.add_parser("bench", help="full tuned comparison matrix "
                                           "(4 methods x 4 mu values)")
    bench_p.add_argument("--n", type=int, default=200)
    bench_p.add_argument("--d", type=int, default=50)
    bench_p.add_argument("--iters", type=int, default=130)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--p", type=_parse_p, default=math.inf)
    bench_p.add_argument("--mus", type=_parse_float_list,
                         default=BENCH_MU_VALUES)
    bench_p.add_argument("--methods", type=_parse_name_list,
                         default=BENCH_METHODS)
    bench_p.add_argument("--grid", type=_parse_float_list,
                         default=STEPSIZE_GRID)
    bench_p.add_argument("--out", dest="out_dir", default="bench")

    chk = sub.add_parser("check-invariants",
                         help="run every invariant over the default matrix")
    chk.add_argument("--p", type=lambda s: tuple(_parse_p(t) for t in s.split(",")),
                     default=(2.0, 3.0, 4.0, math.inf), dest="p_values",
                     help='comma separated exponents, e.g. "2,4,inf"')
    chk.add_argument("--seeds", type=lambda s: tuple(int(t) for t in s.split(",")),
                     default=(0, 1))
    chk.add_argument("--iters", type=int, default=40)
    chk.add_argument("--l-scale", dest="l_scale", type=float, default=1.0,
                     help="scale on the smoothness constant handed to the "
                          "optimizer (values < 1 violate it on purpose)")

    gen = sub.add_parser("gen-instance", help="generate and store an instance")
    _instance_flags(gen, with_config=False)
    gen.add_argument("--solve-reference", dest="solve_ref", action="store_true",
                     help="attach a high-accuracy reference optimum")
    gen.add_argument("--out", required=True, metavar="FILE")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    doc = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - set(_CFG_FIELDS)
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        doc.update(loaded)
    for name in _CFG_FIELDS:
        val = getattr(args, name, None)
        if val is not None and val is not False:
            doc[name] = val
    if "p" in doc:
        doc["p"] = _parse_p(doc["p"])
    return ExperimentConfig(**doc)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    summary = run_experiment(cfg, tune_first=bool(getattr(args, "tune", False)))
    for mu, block in sorted(summary["mus"].items(), key=lambda kv: float(kv[0])):
        for m, entry in sorted(block["methods"].items()):
            print("mu=%-8s %-5s stepsize=%-8g final_f=%.10g gap=%.4e  -> %s"
                  % (mu, m, entry["stepsize"], entry["final_f"],
                     entry["final_gap"], entry["csv"]))
    print("outputs in %s (config %s)" % (cfg.out_dir, summary["config_hash"][:12]))
    fails = summary.get("invariant_failures_total", 0)
    if fails:
        print("invariant failures: %d" % fails, file=sys.stderr)
        return 1
    return 0


def cmd_tune(args) -> int:
    cfg = _config_from_args(args)
    obj = make_objective(cfg)
    geom = LpGeometry(cfg.p)
    L = smoothness_bound(obj, geom)
    x0 = default_x0(obj)
    result = {}
    for m in cfg.methods:
        best, all_div, finals = tune_method(m, obj, x0, geom, L, cfg.iters,
                                            cfg.grid)
        result[m] = {"stepsize": best, "all_divergent": all_div,
                     "final_f": finals[best]}
        flag = "  (all grid points diverged)" if all_div else ""
        print("%-5s stepsize=%-10g final_f=%.10g%s"
              % (m, best, finals[best], flag))
    if getattr(args, "out_dir", None):
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "tune.json").write_text(
            json.dumps(result, indent=1, sort_keys=True) + "\n")
    return 0


def cmd_bench(args) -> int:
    summary = run_bench(n=args.n, d=args.d, iters=args.iters, seed=args.seed,
                        out_dir=args.out_dir, p=args.p, mu_values=args.mus,
                        methods=args.methods, grid=args.grid)
    for mu, block in sorted(summary["mus"].items(), key=lambda kv: float(kv[0])):
        parts = ["mu=%-8s" % mu]
        for m in args.methods:
            parts.append("%s=%.3e" % (m, block["methods"][m]["final_gap"]))
        print("  ".join(parts))
    print("bench written to %s" % args.out_dir)
    return 0


def cmd_check_invariants(args) -> int:
    report = check_invariants(p_values=args.p_values, iters=args.iters,
                              l_scale=args.l_scale, seeds=args.seeds)
    print(report.render())
    return 0 if report.ok else 1


def cmd_gen_instance(args) -> int:
    cfg_kwargs = {name: getattr(args, name) for name in
                  ("objective", "n", "d", "mu", "alpha", "seed")
                  if getattr(args, name, None) is not None}
    cfg = ExperimentConfig(instance_path=getattr(args, "instance_path", None),
                           ref_path=getattr(args, "ref_path", None),
                           **cfg_kwargs)
    obj = make_objective(cfg)
    if args.solve_ref:
        solve_reference(obj)
    save_instance(obj, args.out)
    ref = " (with reference optimum)" if obj.reference_optimum is not None else ""
    print("wrote %s instance d=%d to %s%s"
          % (type(obj).__name__, obj.dim, args.out, ref))
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handlers = {"run": cmd_run, "tune": cmd_tune, "bench": cmd_bench,
                "check-invariants": cmd_check_invariants,
                "gen-instance": cmd_gen_instance}
    try:
        return handlers[args.verb](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
