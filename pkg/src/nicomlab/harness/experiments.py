"""Config-driven entry points: single runs, replication studies and horizon sweeps."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from nicomlab.core import Trace, fmt_fraction
from nicomlab.errors import InfeasibleParamsError
from nicomlab.harness.config import ExperimentConfig
from nicomlab.harness.io import trace_csv, write_json
from nicomlab.harness.protocol import (
    ReplicationSummary,
    SweepResult,
    fit_loglog,
    regret_bound,
    replication_rng,
    run_protocol,
    run_replications,
)


def run_config(cfg: ExperimentConfig, rep: int = 0, seed: int | None = None) -> Trace:
    """One trace of the configured experiment; a pure function of (config, seed, rep)."""
    inst = cfg.build()
    seed = int(cfg["run"]["seed"]) if seed is None else seed
    return run_protocol(inst.mechanism, inst.population, inst.strategies, replication_rng(seed, rep))


def params_dict(params) -> dict:
    return {
        "eta": params.eta,
        "lambda": fmt_fraction(params.lam),
        "beta": fmt_fraction(params.beta),
        "alpha_T": fmt_fraction(params.alpha_T),
        "certified": params.certified,
    }


def run_experiment(cfg: ExperimentConfig, out: Path | str) -> ReplicationSummary:
    """Run R replications, writing one trace CSV per replication and summary.json."""
    out = Path(out)
    inst = cfg.build()
    seed, reps = int(cfg["run"]["seed"]), int(cfg["run"]["reps"])
    (out / "traces").mkdir(parents=True, exist_ok=True)
    per_rep = []

    def record(rep, trace):
        (out / "traces" / f"trace_{rep:04d}.csv").write_text(trace_csv(trace, inst.domain.n))
        per_rep.append({"replication": rep, "realized_alg": trace.realized_objective()})

    summary = run_replications(inst.mechanism, inst.population, inst.strategies, seed, reps, record)
    for row, regret, utils in zip(per_rep, summary.regrets, summary.utilities):
        row["regret"] = regret
        row["discounted_utilities"] = list(utils)
    write_json(out / "summary.json", {
        "config_digest": cfg.digest(),
        "domain": inst.domain.name,
        "T": inst.population.T,
        "params": params_dict(inst.params),
        "opt": summary.opt,
        "opt_index": summary.best_index,
        "seeds": {"master": seed, "replications": reps,
                  "stream": "SeedSequence(entropy=master, spawn_key=(replication,))"},
        "replications": per_rep,
        "mean_regret": summary.mean_regret,
        "se_regret": summary.se_regret,
        "mean_discounted_utilities": summary.mean_utilities,
        "se_discounted_utilities": summary.se_utilities,
        "regret_bound": regret_bound(inst.mechanism, inst.population.T),
    })
    return summary


def regret_sweep(cfg: ExperimentConfig, horizons: Sequence[int], h: float | None = None,
                 reps: int | None = None, seed: int | None = None) -> SweepResult:
    """Mean regret per horizon with per-horizon parameters; infeasible horizons
    are reported and left out of the log-log fit."""
    horizons = [int(T) for T in horizons]
    if len(horizons) < 3 or any(a >= b for a, b in zip(horizons, horizons[1:])):
        raise ValueError("need at least three increasing horizons")
    reps = int(cfg["run"]["reps"]) if reps is None else reps
    seed = int(cfg["run"]["seed"]) if seed is None else seed
    agents = {"participation": "h-schedule"} if h is not None else {}
    if h is not None:
        agents["h"] = h
    rows = []
    for T in horizons:
        sub = cfg.with_overrides(agents={**agents, "T": T})
        try:
            inst = sub.build()
        except InfeasibleParamsError as exc:
            rows.append({"T": T, "status": "infeasible", "lambda": float(exc.lam),
                         "min_T": exc.min_T, "reps": 0, "mean_regret": None, "se_regret": None,
                         "eta": None, "bound": None})
            continue
        summary = run_replications(inst.mechanism, inst.population, inst.strategies, seed, reps)
        rows.append({"T": T, "status": "ok", "lambda": float(inst.params.lam), "min_T": None,
                     "reps": reps, "mean_regret": summary.mean_regret,
                     "se_regret": summary.se_regret, "eta": inst.params.eta,
                     "bound": regret_bound(inst.mechanism, T)})
    return fit_loglog(rows)


SWEEP_COLUMNS = ["T", "status", "reps", "eta", "lambda", "min_T", "mean_regret", "se_regret",
                 "bound", "fitted"]


def write_sweep(out: Path | str, result: SweepResult, digest: str) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in result.rows:
            w.writerow(["" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else r[c])
                        for c in SWEEP_COLUMNS])
    write_json(out / "sweep.json", {
        "config_digest": digest,
        "rows": result.rows,
        "slope": result.slope,
        "intercept": result.intercept,
        "flag": result.flag,
    })
