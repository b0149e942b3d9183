"""Experiment configuration: a flat JSON-serializable record with strict
key checking."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from ..core import Hyperparams
from ..errors import ConfigError

TASKS = ("denoise", "complete", "cluster", "structure")
METHODS = ("pca", "pmf", "dgrmd", "lgmd", "lgmd_plus", "kmeans")


@dataclass
class ExperimentConfig:
    """Flat experiment description (all keys appear verbatim in JSON configs).

    ``sweep`` holds noise ratios (denoise/structure), keep fractions
    (complete) or cluster counts (cluster). ``lambda1_bounds``/
    ``lambda2_bounds`` are log-scale search boxes used only by tuning.
    """

    task: str = "denoise"
    methods: list[str] = field(default_factory=lambda: ["pca", "pmf", "dgrmd", "lgmd"])
    n: int = 100
    p: int = 100
    rank: int = 20
    edge_fraction: float = 0.06
    sweep: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0])
    repetitions: int = 30
    lambda1: float = 0.1
    lambda2: float = 0.1
    lambda1_bounds: list[float] = field(default_factory=lambda: [1e-4, 1e2])
    lambda2_bounds: list[float] = field(default_factory=lambda: [1e-4, 1e2])
    eta1: float = 4.0
    eta2: float = 4.0
    seed: int = 0
    data_path: str | None = None
    data_format: str | None = None
    label_column: int | None = None
    dgrmd_neighbors: int = 5
    edge_top_fraction: float = 0.1
    sigma_ratio: float = 0.3
    separation: float = 1.0
    holdout_fraction: float = 0.1
    max_outer: int = 50
    max_inner: int = 100
    tol_outer: float = 1e-5
    tol_inner: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError("unknown task %r" % self.task)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("unknown method %r" % m)
        if not self.methods:
            raise ConfigError("methods may not be empty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.sweep:
            raise ConfigError("sweep may not be empty")
        for name in ("lambda1_bounds", "lambda2_bounds"):
            lo, hi = getattr(self, name)
            if not (0 < lo < hi):
                raise ConfigError("%s must satisfy 0 < lower < upper" % name)
        if self.rank < 1:
            raise ConfigError("rank must be positive")
        if not (0 < self.holdout_fraction < 1):
            raise ConfigError("holdout_fraction must be in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError("unknown config keys: %s" % sorted(unknown))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hyperparams(self) -> Hyperparams:
        return Hyperparams(
            k=self.rank, lambda1=self.lambda1, lambda2=self.lambda2,
            eta1=self.eta1, eta2=self.eta2,
            max_outer=self.max_outer, max_inner=self.max_inner,
            tol_outer=self.tol_outer, tol_inner=self.tol_inner,
        )
