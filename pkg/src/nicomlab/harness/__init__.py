"""Protocol execution, configuration files, output writers and the CLI."""

from nicomlab.harness.config import ExperimentConfig, Instance
from nicomlab.harness.experiments import regret_sweep, run_config, run_experiment
from nicomlab.harness.protocol import (
    ReplicationSummary,
    SweepResult,
    fit_loglog,
    regret_bound,
    replication_rng,
    run_protocol,
    run_replications,
)

__all__ = [
    "ExperimentConfig",
    "Instance",
    "ReplicationSummary",
    "SweepResult",
    "fit_loglog",
    "regret_bound",
    "regret_sweep",
    "replication_rng",
    "run_config",
    "run_experiment",
    "run_protocol",
    "run_replications",
]
