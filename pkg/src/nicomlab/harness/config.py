"""Experiment configuration files (TOML) and their expansion into runnable
instances. See README.md for the schema."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from nicomlab.core import ABSENT, AgentPopulation, Domain, as_fraction, long_sightedness
from nicomlab.domains import (
    FacilityConfig,
    ResourceConfig,
    VcgConfig,
    facility_domain,
    resource_domain,
    vcg_domain,
)
from nicomlab.errors import ConfigError
from nicomlab.nicom import NicomParams, OnlineMechanism, nicom_params, penalty_gap
from nicomlab.strategic import Scripted, Truthful

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA = {
    "domain": {"name", "n", "m", "k", "class", "members"},
    "agents": {"T", "types", "type_seed", "type_value", "type_file", "participation", "h",
               "discount", "discount_value", "nu", "discount_vector"},
    "adversary": {"weights", "weight_value", "weight_resolution", "externality", "kappa",
                  "kappa_resolution", "externality_table", "seed", "file"},
    "nicom": {"mode", "alpha_T", "beta", "eta", "lambda"},
    "strategy": {"profile", "scripted"},
    "run": {"seed", "reps", "budget", "out", "horizons"},
}

DEFAULTS = {
    "domain": {"name": "facility", "n": 2, "m": 2, "k": 2, "class": None, "members": None},
    "agents": {"T": 16, "types": "uniform", "type_seed": 0, "type_value": "0",
               "type_file": None, "participation": "all", "h": 0.0, "discount": "constant",
               "discount_value": "1", "nu": "1/2", "discount_vector": None},
    "adversary": {"weights": "fixed", "weight_value": "1", "weight_resolution": 4,
                  "externality": "fixed", "kappa": "0", "kappa_resolution": 4,
                  "externality_table": None, "seed": 0, "file": None},
    "nicom": {"mode": "auto", "alpha_T": "auto", "beta": "auto", "eta": None, "lambda": None},
    "strategy": {"profile": "truthful", "scripted": None},
    "run": {"seed": 0, "reps": 1, "budget": 10_000_000, "out": "out", "horizons": None},
}

DEFAULT_CLASS = {"facility": "posted-location", "vcg": "vcg-reserve", "resource": "posted-allocation"}


@dataclass
class Instance:
    """A fully expanded experiment: domain, agents, objectives and mechanism."""

    domain: Domain
    population: AgentPopulation
    objectives: tuple
    params: NicomParams
    mechanism: OnlineMechanism
    strategies: list


class ExperimentConfig:
    """Validated, defaults-filled configuration.

    ``sections`` maps section name to a plain dict; ``base_dir`` resolves
    relative file references.
    """

    def __init__(self, raw: dict, base_dir: Path | str = "."):
        self.base_dir = Path(base_dir)
        unknown = set(raw) - set(SCHEMA)
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        self.sections = {}
        for name, keys in SCHEMA.items():
            given = raw.get(name, {})
            if not isinstance(given, dict):
                raise ConfigError(f"section [{name}] must be a table")
            bad = set(given) - keys
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
            merged = copy.deepcopy(DEFAULTS[name])
            merged.update(given)
            self.sections[name] = merged
        self._validate()

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls(raw, path.parent)

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def _validate(self):
        d, a, r = self["domain"], self["agents"], self["run"]
        if d["name"] not in DEFAULT_CLASS:
            raise ConfigError(f"unknown domain {d['name']!r}")
        if d["class"] is None:
            d["class"] = DEFAULT_CLASS[d["name"]]
        allowed = {"facility": {"posted-location"}, "vcg": {"vcg-reserve"},
                   "resource": {"posted-allocation", "max-min-fair"}}[d["name"]]
        if d["class"] not in allowed:
            raise ConfigError(f"class {d['class']!r} not available for {d['name']}")
        if int(a["T"]) < 1:
            raise ConfigError("T must be at least 1")
        if int(r["reps"]) < 1:
            raise ConfigError("reps must be at least 1")
        if a["participation"] not in ("all", "h-schedule"):
            raise ConfigError(f"unknown participation {a['participation']!r}")
        if self["nicom"]["mode"] not in ("auto", "manual"):
            raise ConfigError(f"unknown nicom mode {self['nicom']['mode']!r}")
        if self["strategy"]["profile"] not in ("truthful", "scripted"):
            raise ConfigError(f"unknown strategy profile {self['strategy']['profile']!r}")
        if self["adversary"]["weights"] not in ("fixed", "uniform", "file"):
            raise ConfigError(f"unknown weights script {self['adversary']['weights']!r}")
        if self["adversary"]["externality"] not in ("fixed", "uniform", "file", "table"):
            raise ConfigError(f"unknown externality script {self['adversary']['externality']!r}")
        for key in ("type_file",):
            if a[key] is not None and not self._path(a[key]).exists():
                raise ConfigError(f"file not found: {a[key]}")
        if self["adversary"]["file"] is not None and not self._path(self["adversary"]["file"]).exists():
            raise ConfigError(f"file not found: {self['adversary']['file']}")

    def _path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def to_dict(self) -> dict:
        return copy.deepcopy(self.sections)

    def digest(self) -> str:
        """sha256 of the canonical settings; the output directory is left out
        so that relocating a run does not change its identity."""
        content = self.to_dict()
        del content["run"]["out"]
        blob = json.dumps(content, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, **sections) -> "ExperimentConfig":
        raw = self.to_dict()
        for name, values in sections.items():
            raw[name].update(values)
        return ExperimentConfig(raw, self.base_dir)

    # -- expansion ----------------------------------------------------------

    def domain(self) -> Domain:
        d = self["domain"]
        members = d["members"]
        n = int(d["n"])
        if d["name"] == "facility":
            return facility_domain(FacilityConfig(n, int(d["m"]), int(d["k"])), members)
        if d["name"] == "vcg":
            return vcg_domain(VcgConfig(n, int(d["m"])), members)
        return resource_domain(ResourceConfig(n, int(d["k"]), d["class"]), members)

    def population(self, domain: Domain) -> AgentPopulation:
        a = self["agents"]
        T, n = int(a["T"]), domain.n
        space = list(domain.type_space)
        spec = a["types"]
        if isinstance(spec, list):
            types = [[_parse_type(x) for x in row] for row in spec]
        elif spec == "uniform":
            rng = np.random.default_rng(int(a["type_seed"]))
            idx = rng.integers(len(space), size=(T, n))
            types = [[space[j] for j in row] for row in idx]
        elif spec == "constant":
            types = [[as_fraction(a["type_value"])] * n for _ in range(T)]
        elif spec == "file":
            with open(self._path(a["type_file"]), newline="") as fh:
                types = [[_parse_type(x) for x in row] for row in csv.reader(fh) if row]
        else:
            raise ConfigError(f"unknown types spec {spec!r}")
        if len(types) != T or any(len(row) != n for row in types):
            raise ConfigError(f"types must be a {T} x {n} table")
        for row in types:
            for x in row:
                if x is not ABSENT and x not in space:
                    raise ConfigError(f"type {x} outside the domain's type space")
        if a["participation"] == "h-schedule":
            active = math.ceil(T ** float(a["h"]))
            types = [[x if t < active else ABSENT for x in row] for t, row in enumerate(types)]
        kind = a["discount"]
        if kind == "constant":
            g = as_fraction(a["discount_value"])
            discount = [[g] * T for _ in range(n)]
        elif kind == "geometric":
            nu = as_fraction(a["nu"])
            discount = [[nu ** (t + 1) for t in range(T)] for _ in range(n)]
        elif kind == "explicit":
            discount = [[as_fraction(x) for x in row] for row in a["discount_vector"]]
        else:
            raise ConfigError(f"unknown discount {kind!r}")
        try:
            return AgentPopulation.build(types, discount)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def objectives(self, domain: Domain) -> tuple:
        adv, T, n = self["adversary"], int(self["agents"]["T"]), domain.n
        rng = np.random.default_rng(int(adv["seed"]))
        rows = None
        if adv["file"] is not None:
            with open(self._path(adv["file"]), newline="") as fh:
                rows = list(csv.DictReader(fh))
            if len(rows) < T:
                raise ConfigError(f"adversary file has {len(rows)} rounds, need {T}")
        if domain.name == "vcg":
            kind = adv["externality"]
            if kind == "fixed":
                data = [as_fraction(adv["kappa"])] * T
            elif kind == "uniform":
                q = int(adv["kappa_resolution"])
                data = [Fraction(int(j), q) for j in rng.integers(q + 1, size=T)]
            elif kind == "table":
                table = {tuple(int(x) for x in key.split(",") if x != ""): as_fraction(v)
                         for key, v in (adv["externality_table"] or {}).items()}
                data = [table] * T
            else:
                data = [as_fraction(rows[t]["kappa"]) for t in range(T)]
        else:
            kind = adv["weights"]
            if kind == "fixed":
                data = [(as_fraction(adv["weight_value"]),) * n] * T
            elif kind == "uniform":
                q = int(adv["weight_resolution"])
                data = [tuple(Fraction(int(j), q) for j in row)
                        for row in rng.integers(q + 1, size=(T, n))]
            elif kind == "file":
                data = [tuple(as_fraction(rows[t][f"r_{i}"]) for i in range(n)) for t in range(T)]
            else:
                raise ConfigError(f"weights script {kind!r} not valid here")
        return tuple(domain.objective(x) for x in data)

    def params(self, domain: Domain, population: AgentPopulation) -> NicomParams:
        c = self["nicom"]
        alpha = (long_sightedness(population) if c["alpha_T"] == "auto"
                 else as_fraction(c["alpha_T"]))
        if c["beta"] == "auto":
            if domain.commitment is None:
                raise ConfigError("no commitment mechanism: beta cannot be computed")
            beta = penalty_gap(domain.commitment, domain.type_spaces, domain.utility,
                               budget=int(self["run"]["budget"]))
            if beta is None:
                raise ConfigError("penalty gap is vacuous (singleton type space)")
        else:
            beta = as_fraction(c["beta"])
        if c["mode"] == "manual":
            if c["eta"] is None or c["lambda"] is None:
                raise ConfigError("manual mode needs eta and lambda")
            return NicomParams.manual(c["eta"], c["lambda"], beta, alpha)
        eta = None if c["eta"] is None else as_fraction(c["eta"])
        return nicom_params(alpha, population.T, beta, eta)

    def strategies(self, domain: Domain) -> list:
        s = self["strategy"]
        sigma = [Truthful() for _ in range(domain.n)]
        if s["profile"] == "scripted":
            for agent, reports in (s["scripted"] or {}).items():
                i = int(agent)
                if not 0 <= i < domain.n:
                    raise ConfigError(f"scripted agent {i} out of range")
                sigma[i] = Scripted([_parse_type(x) for x in reports])
        return sigma

    def build(self) -> Instance:
        domain = self.domain()
        population = self.population(domain)
        objectives = self.objectives(domain)
        params = self.params(domain, population)
        M = OnlineMechanism.from_domain(domain, params, objectives)
        return Instance(domain, population, objectives, params, M, self.strategies(domain))


def _parse_type(x):
    if x is None or x == "_" or x == "":
        return ABSENT
    return as_fraction(x)
