"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a PASS/FAIL line; conftest prints the collected lines at
the end of the session. Run this file directly for the lines alone:

    python3 tests/test_acceptance.py
"""

import itertools
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from nicomlab.core import AgentPopulation
from nicomlab.domains import (
    FacilityConfig,
    ResourceConfig,
    VcgConfig,
    facility_domain,
    resource_domain,
    vcg_domain,
)
from nicomlab.errors import InfeasibleParamsError
from nicomlab.harness import ExperimentConfig, regret_bound, regret_sweep, replication_rng, run_protocol, run_replications
from nicomlab.harness.cli import main as cli_main
from nicomlab.learning import dp_exhaustive, hedge_builder
from nicomlab.nicom import NicomParams, OnlineMechanism, nicom_params, penalty_gap
from nicomlab.strategic import (
    Scripted,
    Truthful,
    audit_single_round,
    best_response_value,
    exact_expected_utilities,
)

RESULTS: dict = {}


def record(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    RESULTS[number] = line
    print(line)
    return passed


# -- 1 --------------------------------------------------------------------------------


def test_c1_weak_dp_bound():
    dom = facility_domain(FacilityConfig(1, 1, 2), [0, 3])
    G = dom.objective((1,))
    reports = [(x,) for x in dom.type_space]
    start = time.perf_counter()
    parts, ok = [], True
    for eta in (0.05, 0.1, 0.5):
        res = dp_exhaustive(hedge_builder(eta, dom.mechanism_class), reports, [G] * 3, 3)
        ok &= res.max_log_ratio <= 4 * eta + 1e-9
        parts.append(f"eta={eta}: {res.max_log_ratio:.6g} <= {4 * eta:g}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    assert record(1, "weak-DP bound", ok, "; ".join(parts) + f" ({elapsed:.2f}s)")


# -- 2 --------------------------------------------------------------------------------


def _gap(dom):
    return penalty_gap(dom.commitment, dom.type_spaces, dom.utility)


def test_c2_penalty_gap_floors():
    start = time.perf_counter()
    misses = []
    checked = 0
    for m in range(1, 5):
        for k in (2, 3):
            for n in (1, 2):
                beta = _gap(facility_domain(FacilityConfig(n, m, k)))
                checked += 1
                if beta < F(1, m * m):
                    misses.append(f"facility m={m} k={k} n={n}: {beta} < {F(1, m * m)}")
    for m in range(1, 5):
        for n in (1, 2):
            beta = _gap(vcg_domain(VcgConfig(n, m)))
            checked += 1
            if beta < F(1, 4 * m * m):
                misses.append(f"vcg m={m} n={n}: {beta} < {F(1, 4 * m * m)}")
    vacuous = []
    for n in (2, 3):  # the commitment needs n >= 2
        for k in (1, 2, 3):
            beta = _gap(resource_domain(ResourceConfig(n, k)))
            checked += 1
            if beta is None:  # a single type leaves nothing to misreport
                vacuous.append(f"n={n} k={k}")
            elif beta < F(1, 2 * n * k):
                misses.append(f"resource n={n} k={k}: {beta} < {F(1, 2 * n * k)}")
    elapsed = time.perf_counter() - start
    ok = not misses and elapsed < 60
    detail = f"{checked} instances, {len(misses)} below floor"
    if misses:
        detail += " [" + "; ".join(misses) + "]"
    detail += f"; vacuous: {', '.join(vacuous)} ({elapsed:.2f}s)"
    assert record(2, "penalty-gap floors", ok, detail)


# -- 3 --------------------------------------------------------------------------------


def test_c3_vcg_reserve_dsic():
    start = time.perf_counter()
    members = violations = 0
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            dom = vcg_domain(VcgConfig(n, m))
            for pi in dom.mechanism_class:
                members += 1
                violations += len(audit_single_round(pi, "DSIC", dom.type_spaces, dom.utility))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 60
    assert record(3, "single-round DSIC of reserve VCG", ok,
                  f"{members} mechanisms audited, {violations} violations ({elapsed:.2f}s)")


# -- 4 --------------------------------------------------------------------------------


def test_c4_certified_instance_best_response():
    start = time.perf_counter()
    types = [[0, 1], [1, F(1, 2)], [1, 0]]
    A = AgentPopulation.build(types)
    dom = facility_domain(FacilityConfig(2, 2, 2), [0, 4, 8, 2])
    beta = _gap(dom)
    try:
        nicom_params(3, 3, beta)
        note = ""
    except InfeasibleParamsError as exc:
        note = f"default eta infeasible (lambda={exc.lam}); "
    params = nicom_params(3, 3, beta, eta=F(1, 384))
    M = OnlineMechanism.from_domain(dom, params, [dom.objective((1, 1))] * 3)
    reports = [best_response_value(i, M, A, tol=1e-7) for i in range(2)]
    elapsed = time.perf_counter() - start
    nodes = sum(r.nodes for r in reports)
    ok = all(r.gap <= 1e-7 for r in reports) and elapsed < 300 and nodes <= 10 ** 7
    gaps = ", ".join(f"agent {r.agent} gap {r.gap:.3g}" for r in reports)
    assert record(4, "best response on certified instance", ok,
                  f"{note}eta=1/384, lambda={params.lam}, beta={beta}; {gaps}; "
                  f"{nodes} nodes ({elapsed:.2f}s)")


# -- 5 --------------------------------------------------------------------------------

CRITERION_5 = {
    "domain": {"name": "facility", "n": 2, "m": 2, "k": 2},
    "agents": {"T": 512, "types": "uniform", "type_seed": 0},
    "adversary": {"weights": "uniform", "seed": 0},
    "nicom": {"mode": "auto"},
    "run": {"seed": 0, "reps": 100},
}


def test_c5_hedge_regret_bound():
    start = time.perf_counter()
    cfg = ExperimentConfig(CRITERION_5)
    try:
        inst = cfg.build()
    except InfeasibleParamsError as exc:
        record(5, "regret bound at T=512", False,
               f"default parameters infeasible: {exc}")
        pytest.fail(str(exc))
    s = run_replications(inst.mechanism, inst.population, inst.strategies, 0, 100)
    bound = regret_bound(inst.mechanism, 512)
    elapsed = time.perf_counter() - start
    ok = s.mean_regret <= bound + 4 * s.se_regret and elapsed < 120
    assert record(5, "regret bound at T=512", ok,
                  f"mean regret {s.mean_regret:.4g} (se {s.se_regret:.3g}) vs bound {bound:.4g} "
                  f"({elapsed:.1f}s)")


# -- 6 --------------------------------------------------------------------------------


def test_c6_regret_exponent():
    start = time.perf_counter()
    cfg = ExperimentConfig({**CRITERION_5, "run": {"seed": 0, "reps": 50}})
    horizons = [2 ** j for j in range(6, 13)]
    res = regret_sweep(cfg, horizons, h=0.0, reps=50)
    elapsed = time.perf_counter() - start
    infeasible = [r["T"] for r in res.rows if r["status"] == "infeasible"]
    ok = res.slope is not None and res.slope <= 0.65 and elapsed < 900
    slope = "undefined" if res.slope is None else f"{res.slope:.3f}"
    assert record(6, "regret exponent", ok,
                  f"slope {slope} ({res.flag or 'fitted'}); infeasible T: {infeasible}; "
                  f"{elapsed:.1f}s")


# -- 7 --------------------------------------------------------------------------------


def _mc_instances():
    half = F(1, 2)
    fdom = facility_domain(FacilityConfig(2, 2, 2), [0, 4, 8])
    fA = AgentPopulation.build([[0, 1], [half, 1]])
    fM = OnlineMechanism.from_domain(fdom, NicomParams.manual("1/2", "1/3", "1/4", 2),
                                     [fdom.objective((1, 1))] * 2)
    deviation = best_response_value(0, fM, fA).policy()

    vdom = vcg_domain(VcgConfig(2, 1))
    vA = AgentPopulation.build([[1, 0], [1, 1]], [[1, half], [1, 1]])
    vM = OnlineMechanism.from_domain(vdom, NicomParams.manual("1", "1/4", "1/6", 2),
                                     [vdom.objective(0), vdom.objective(half)])

    rdom = resource_domain(ResourceConfig(2, 2, "max-min-fair"))
    rA = AgentPopulation.build([[1, 2], [2, None]])
    rM = OnlineMechanism.from_domain(rdom, NicomParams.manual("1", "1/3", "1/8", 2),
                                     [rdom.objective((1, 1)), rdom.objective((half, 1))])
    return [
        ("facility", fM, fA, [deviation, Truthful()]),
        ("vcg", vM, vA, [Truthful(), Scripted([F(1), F(1)])]),
        ("resource", rM, rA, [Truthful(), Truthful()]),
    ]


def test_c7_exact_vs_monte_carlo():
    start = time.perf_counter()
    runs = 100_000
    parts, ok = [], True
    for name, M, A, sigma in _mc_instances():
        exact = [float(v) for v in exact_expected_utilities(M, A, sigma)]
        samples = np.empty((runs, A.n))
        for rep in range(runs):
            trace = run_protocol(M, A, sigma, replication_rng(7, rep))
            samples[rep] = [float(u) for u in trace.discounted_utilities(A)]
        mean = samples.mean(axis=0)
        se = samples.std(axis=0, ddof=1) / math.sqrt(runs)
        for i in range(A.n):
            tol = max(4 * se[i], 1e-12)
            good = abs(mean[i] - exact[i]) <= tol
            ok &= good
            parts.append(f"{name} u{i}: exact {exact[i]:.5f} mc {mean[i]:.5f} "
                         f"(|diff| {abs(mean[i] - exact[i]):.2g} <= {tol:.2g})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    assert record(7, "exact vs Monte Carlo", ok, "; ".join(parts) + f" ({elapsed:.1f}s)")


# -- 8 --------------------------------------------------------------------------------


def test_c8_reproducibility(tmp_path):
    start = time.perf_counter()
    cfg = tmp_path / "exp.toml"
    cfg.write_text('[domain]\nname = "facility"\nn = 2\nm = 1\nk = 2\n'
                   '[agents]\nT = 64\n[adversary]\nweights = "uniform"\n'
                   '[nicom]\nmode = "manual"\neta = "1/4"\nlambda = "1/4"\n'
                   'beta = "1"\nalpha_T = "1"\n[run]\nreps = 3\n')
    outs = {}
    for tag, seed in (("a", 11), ("b", 11), ("c", 12)):
        cli_main(["run", "--config", str(cfg), "--seed", str(seed), "--out", str(tmp_path / tag)])
        outs[tag] = [(tmp_path / tag / "traces" / f"trace_{r:04d}.csv").read_bytes()
                     for r in range(3)]
        outs[tag].append((tmp_path / tag / "summary.json").read_bytes())
    elapsed = time.perf_counter() - start
    same = outs["a"] == outs["b"]
    differ = all(x != y for x, y in zip(outs["a"][:3], outs["c"][:3]))
    ok = same and differ and elapsed < 10
    assert record(8, "reproducibility", ok,
                  f"same seed identical: {same}; other seed differs: {differ} ({elapsed:.2f}s)")


# -- 9 --------------------------------------------------------------------------------


def test_c9_parameter_arithmetic():
    cases = [((1, 10_000, F(1, 2)), (0.01, F(8, 25))),
             ((1, 256, F(1)), (1 / 16, F(1)))]
    parts, ok = [], True
    for (alpha, T, beta), (eta, lam) in cases:
        p = nicom_params(alpha, T, beta)
        good = p.eta == eta and p.lam == lam and p.certified
        good &= p.eta == 1 / math.sqrt(alpha * T)
        good &= p.lam == 16 * F(alpha) / (beta * math.isqrt(alpha * T))
        ok &= good
        parts.append(f"(alpha={alpha}, T={T}, beta={beta}) -> eta={p.eta}, lambda={p.lam}")
    p = nicom_params(3, 3, F(1, 4), eta=F(1, 384))
    ok &= p.lam == F(1, 2) and p.certified
    parts.append(f"(alpha=3, T=3, beta=1/4, eta=1/384) -> lambda={p.lam}")
    try:
        nicom_params(4, 64, F(1, 4))
        ok = False
        parts.append("(4, 64, 1/4) did not raise")
    except InfeasibleParamsError as exc:
        parts.append(f"(4, 64, 1/4) -> infeasible, lambda={exc.lam}")
    assert record(9, "parameter arithmetic", ok, "; ".join(parts))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
