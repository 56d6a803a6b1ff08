"""Experiment configuration, JSON round-trip and defaults."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields

EXPERIMENTS = ("gaussian", "logreg", "weight-collapse")
OUTPUT_ENV = "ALPHAVI_OUT"


class ConfigError(ValueError):
    pass


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "results")


@dataclass
class ExperimentConfig:
    experiment: str = "gaussian"
    estimators: list = field(default_factory=lambda: ["renyi", "rws", "stl", "chivi", "drep"])
    alpha: float = 0.5
    dims: list = field(default_factory=lambda: [10, 100, 1000])
    ks: list = field(default_factory=lambda: [10, 100, 1000])
    steps: int = 2000
    step_size: float = 0.01
    init_variance: float = 9.0
    dataset_path: str = ""
    prior_variance: float = 1.0
    seed: int = 0
    replicates: int = 5
    output_dir: str = field(default_factory=default_output_dir)
    trace_every: int = 1
    loss_every: int = 50
    loss_subsample: int = 1000
    top: int = 10
    hmc_leapfrog_steps: int = 32
    hmc_warmup: int = 1000
    hmc_samples: int = 2000
    hmc_chains: int = 4
    hmc_target_accept: float = 0.7
    max_rhat: float = 1.05
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if not self.ks or min(self.ks) < 1:
            raise ConfigError("every K must be >= 1")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.experiment != "logreg" and (not self.dims or min(self.dims) < 1):
            raise ConfigError("every dim must be >= 1")

    @classmethod
    def for_experiment(cls, experiment, **overrides) -> "ExperimentConfig":
        base = {"experiment": experiment}
        if experiment == "logreg":
            base.update(steps=5000, trace_every=50)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
