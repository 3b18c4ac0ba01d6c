"""Command-line entry point.

Exit status: 0 success, 1 a check found a violation, 2 bad configuration,
3 infeasible parameters, 4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time
from pathlib import Path

from nicomlab.core import fmt_type
from nicomlab.errors import BudgetExceededError, ConfigError, InfeasibleParamsError
from nicomlab.harness.config import ExperimentConfig
from nicomlab.harness.experiments import params_dict, regret_sweep, run_experiment, write_sweep
from nicomlab.harness.io import write_json
from nicomlab.learning import dp_exhaustive, hedge_builder
from nicomlab.nicom import penalty_gap_report
from nicomlab.strategic import audit_single_round, best_response_value


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig({})
    run = {}
    for key in ("seed", "reps", "budget", "out"):
        value = getattr(args, key)
        if value is not None:
            run[key] = value
    return cfg.with_overrides(run=run) if run else cfg


def _out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg["run"]["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out(cfg)
    summary = run_experiment(cfg, out)
    se = "n/a" if summary.se_regret is None else f"{summary.se_regret:.6g}"
    print(f"opt={float(summary.opt):.6g} mean_regret={summary.mean_regret:.6g} se={se} "
          f"reps={summary.reps} -> {out / 'summary.json'}")
    return 0


def cmd_audit_nic(args) -> int:
    cfg = _load(args)
    inst = cfg.build()
    budget = int(cfg["run"]["budget"])
    agents = range(inst.domain.n) if args.agent is None else [args.agent]
    reports = [best_response_value(i, inst.mechanism, inst.population, args.tol, budget)
               for i in agents]
    for r in reports:
        status = "ok" if r.certified else "VIOLATION"
        print(f"agent {r.agent}: truthful={r.truthful_value:.9g} best={r.best_value:.9g} "
              f"gap={r.gap:.3g} {status}")
    write_json(_out(cfg) / "audit_nic.json", {
        "config_digest": cfg.digest(),
        "params": params_dict(inst.params),
        "reports": [r.to_dict() for r in reports],
    })
    return 0 if all(r.certified for r in reports) else 1


def _violation_dict(v) -> dict:
    return {"agent": v.agent, "true_type": fmt_type(v.true_type), "report": fmt_type(v.report),
            "others": [fmt_type(x) for x in v.others], "deficit": v.deficit}


def cmd_audit_dsic(args) -> int:
    cfg = _load(args)
    domain = cfg.domain()
    budget = int(cfg["run"]["budget"])
    targets = list(domain.mechanism_class)
    if args.commitment:
        if domain.commitment is None:
            raise ConfigError("domain has no commitment mechanism")
        targets.append(domain.commitment)
    results = []
    for pi in targets:
        found = audit_single_round(pi, args.kind, domain.type_spaces, domain.utility,
                                   budget=budget)
        results.append({"mechanism": pi.name, "index": pi.index, "descriptor": str(pi.descriptor),
                        "violations": [_violation_dict(v) for v in found]})
    bad = sum(1 for r in results if r["violations"])
    print(f"{args.kind} audit: {len(results)} mechanisms, {bad} with violations")
    write_json(_out(cfg) / f"audit_{args.kind.lower()}.json",
               {"config_digest": cfg.digest(), "kind": args.kind, "results": results})
    return 0 if bad == 0 else 1


def cmd_dp_check(args) -> int:
    cfg = _load(args)
    domain = cfg.domain()
    objectives = cfg.objectives(domain)
    if args.max_t > len(objectives):
        raise ConfigError(f"max-t {args.max_t} exceeds horizon T={len(objectives)}")
    profiles = list(itertools.product(domain.type_space, repeat=domain.n))
    etas = args.eta or [cfg.params(domain, cfg.population(domain)).eta]
    rows, ok = [], True
    for eta in etas:
        t0 = time.perf_counter()
        res = dp_exhaustive(hedge_builder(eta, domain.mechanism_class), profiles, objectives,
                            args.max_t)
        bound = 4 * eta
        passed = res.max_log_ratio <= bound + 1e-9
        ok &= passed
        print(f"eta={eta:g}: max log-ratio {res.max_log_ratio:.6g} (bound {bound:.6g}) "
              f"{'ok' if passed else 'VIOLATION'}")
        rows.append({"eta": eta, "max_log_ratio": res.max_log_ratio, "bound": bound,
                     "pass": passed, "pairs_checked": res.pairs_checked,
                     "worst_index": res.worst_index, "seconds": time.perf_counter() - t0})
    write_json(_out(cfg) / "dp_check.json",
               {"config_digest": cfg.digest(), "max_t": args.max_t, "results": rows})
    return 0 if ok else 1


def cmd_penalty_gap(args) -> int:
    cfg = _load(args)
    domain = cfg.domain()
    if domain.commitment is None:
        raise ConfigError("domain has no commitment mechanism")
    rep = penalty_gap_report(domain.commitment, domain.type_spaces, domain.utility,
                             include_absent=not args.no_absent, budget=int(cfg["run"]["budget"]))
    if rep.value is None:
        print("penalty gap: vacuous (no agent has a possible misreport)")
    else:
        print(f"penalty gap: {rep.value} ({float(rep.value):.6g}) at agent {rep.agent}, "
              f"type {fmt_type(rep.true_type)}, report {fmt_type(rep.report)}")
    write_json(_out(cfg) / "penalty_gap.json", {
        "config_digest": cfg.digest(),
        "beta": rep.value,
        "witness": None if rep.value is None else {
            "agent": rep.agent, "true_type": fmt_type(rep.true_type),
            "report": fmt_type(rep.report), "others": [fmt_type(x) for x in rep.others]},
        "profiles": rep.profiles,
    })
    return 0


def cmd_regret_sweep(args) -> int:
    cfg = _load(args)
    horizons = args.horizons or cfg["run"]["horizons"]
    if not horizons:
        raise ConfigError("no horizons given (use --horizons or [run] horizons)")
    result = regret_sweep(cfg, horizons, h=args.h)
    for r in result.rows:
        if r["status"] == "ok":
            print(f"T={r['T']}: mean regret {r['mean_regret']:.6g} (se {r['se_regret']}) "
                  f"bound {r['bound']:.6g}")
        else:
            print(f"T={r['T']}: infeasible (lambda={r['lambda']:.6g}, min T {r['min_T']})")
    if result.slope is None:
        print(f"slope: undefined ({result.flag})")
    else:
        print(f"slope: {result.slope:.4f}")
    write_sweep(_out(cfg), result, cfg.digest())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment TOML file")
    common.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
    common.add_argument("--reps", type=int, help="replication count (overrides [run] reps)")
    common.add_argument("--out", help="output directory (overrides [run] out)")
    common.add_argument("--budget", type=int, help="enumeration budget in nodes")

    parser = argparse.ArgumentParser(prog="nicomlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run replications, write traces and summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit-nic", parents=[common], help="exact best response per agent")
    p.add_argument("--agent", type=int, help="audit one agent only")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_audit_nic)

    p = sub.add_parser("audit-dsic", parents=[common], help="single-round audit over the class")
    p.add_argument("--kind", choices=["DSIC", "NIC"], default="DSIC")
    p.add_argument("--commitment", action="store_true", help="also audit the commitment")
    p.set_defaults(func=cmd_audit_dsic)

    p = sub.add_parser("dp-check", parents=[common], help="exhaustive weak-DP verification")
    p.add_argument("--eta", type=float, action="append", help="learning rate (repeatable)")
    p.add_argument("--max-t", type=int, default=3)
    p.set_defaults(func=cmd_dp_check)

    p = sub.add_parser("penalty-gap", parents=[common], help="brute-force commitment gap")
    p.add_argument("--no-absent", action="store_true", help="exclude non-participating others")
    p.set_defaults(func=cmd_penalty_gap)

    p = sub.add_parser("regret-sweep", parents=[common], help="multi-horizon regret study")
    p.add_argument("--horizons", type=int, nargs="+")
    p.add_argument("--h", type=float, help="participation exponent: first ceil(T^h) rounds")
    p.set_defaults(func=cmd_regret_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleParamsError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except BudgetExceededError as exc:
        print(str(exc), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
