"""
Experiment configuration.

A single JSON file describes the system, dictionary, data sizes and seeds,
the reduction and its optimiser, and the evaluation grids. Every section
is a dataclass with to_dict()/from_dict(); unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from math import comb
from pathlib import Path
from typing import Any

from grassmann_edmd.dictionary.observables import (
    Dictionary,
    coordinate_dictionary,
    monomial_dictionary,
)
from grassmann_edmd.dynamics.data import Box
from grassmann_edmd.dynamics.flow import IntegratorSettings, SampledMap
from grassmann_edmd.dynamics.systems import SYSTEMS, get_system
from grassmann_edmd.errors import ConfigError
from grassmann_edmd.optimizer.config import TrustRegionConfig

DICTIONARY_KINDS = ("monomial", "coordinate")
SCALES = ("full", "desk")


def _check_keys(cls, data: dict, section: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{section}' must be an object, got {type(data).__name__}")
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {sorted(unknown)}")


def _box(value, section: str) -> Box:
    try:
        return Box.from_list(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid box in '{section}': {e}") from e


@dataclass(frozen=True)
class SystemConfig:
    """Dynamical system and its sampling."""

    name: str = "duffing"
    dt: float = 0.1
    params: dict[str, Any] = field(default_factory=dict)
    integrator: IntegratorSettings = IntegratorSettings()

    def validate(self):
        if self.name not in SYSTEMS:
            available = ", ".join(sorted(SYSTEMS))
            raise ConfigError(f"Unknown system {self.name!r} (available: {available})")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        self.integrator.validate()

    @property
    def dim(self) -> int:
        return self.build_field().dim

    def build_field(self):
        try:
            return get_system(self.name, self.params)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid parameters for system {self.name!r}: {e}") from e

    def build_map(self) -> SampledMap:
        return SampledMap(self.build_field(), dt=self.dt, settings=self.integrator)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dt": self.dt,
            "params": dict(self.params),
            "integrator": self.integrator.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SystemConfig:
        _check_keys(cls, data, "system")
        data = dict(data)
        if "integrator" in data:
            _check_keys(IntegratorSettings, data["integrator"], "system.integrator")
            data["integrator"] = IntegratorSettings.from_dict(data["integrator"])
        return cls(**data)


@dataclass(frozen=True)
class DictionaryConfig:
    """Observable dictionary: all monomials up to max_degree, coordinates first."""

    kind: str = "monomial"
    max_degree: int = 7
    s: int | None = None

    def validate(self, n: int):
        if self.kind not in DICTIONARY_KINDS:
            raise ConfigError(
                f"Unknown dictionary kind {self.kind!r}, use one of {DICTIONARY_KINDS}"
            )
        if self.max_degree < 1:
            raise ConfigError(f"max_degree must be at least 1, got {self.max_degree}")
        if self.s is not None and not n <= self.s <= self.size(n):
            raise ConfigError(f"Need n <= s <= M, got s={self.s}, n={n}, M={self.size(n)}")

    def size(self, n: int) -> int:
        """Number M of observables."""
        return n if self.kind == "coordinate" else comb(n + self.max_degree, self.max_degree)

    def head(self, n: int) -> int:
        return n if self.s is None else self.s

    def build(self, n: int) -> Dictionary:
        if self.kind == "coordinate":
            return coordinate_dictionary(n)
        return monomial_dictionary(n, self.max_degree, s=self.s)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "max_degree": self.max_degree, "s": self.s}

    @classmethod
    def from_dict(cls, data: dict) -> DictionaryConfig:
        _check_keys(cls, data, "dictionary")
        return cls(**data)


@dataclass(frozen=True)
class DataConfig:
    """Training and test data sizes, sampling domain and seeds."""

    domain: Box = Box.square(1.0)
    L: int = 5000
    J: int = 100
    N: int = 20
    train_seed: int = 0
    test_seed: int = 1
    init_seed: int = 2

    def validate(self, n: int):
        if self.domain.dim != n:
            raise ConfigError(f"Domain has dimension {self.domain.dim}, system has {n}")
        for name in ("L", "J", "N"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        for name in ("train_seed", "test_seed", "init_seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_list(),
            "L": self.L,
            "J": self.J,
            "N": self.N,
            "train_seed": self.train_seed,
            "test_seed": self.test_seed,
            "init_seed": self.init_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> DataConfig:
        _check_keys(cls, data, "data")
        data = dict(data)
        if "domain" in data:
            data["domain"] = _box(data["domain"], "data.domain")
        return cls(**data)


INIT_MODES = ("random", "krylov")


@dataclass(frozen=True)
class ReductionConfig:
    """
    Subspace dimension, starting subspace and optimiser settings.

    init "random" draws U0 from init_seed, "krylov" starts from the tail
    directions that drive the coordinate prediction.
    """

    r: int = 3
    optimizer: TrustRegionConfig = TrustRegionConfig()
    init: str = "random"

    def validate(self, d: int):
        if not 1 <= self.r <= d:
            raise ConfigError(f"Need 1 <= r <= M - s = {d}, got r={self.r}")
        if self.init not in INIT_MODES:
            raise ConfigError(f"Unknown init {self.init!r}, use one of {INIT_MODES}")
        self.optimizer.validate()

    def to_dict(self) -> dict:
        return {"r": self.r, "optimizer": self.optimizer.to_dict(), "init": self.init}

    @classmethod
    def from_dict(cls, data: dict) -> ReductionConfig:
        _check_keys(cls, data, "reduction")
        data = dict(data)
        if "optimizer" in data:
            data["optimizer"] = TrustRegionConfig.from_dict(data["optimizer"])
        return cls(**data)


@dataclass(frozen=True)
class GridConfig:
    """Evaluation grid: box and nodes per axis."""

    box: Box = Box.square(1.0)
    resolution: int = 81

    def validate(self, n: int):
        if self.box.dim != n:
            raise ConfigError(f"Grid box has dimension {self.box.dim}, system has {n}")
        if self.resolution < 2:
            raise ConfigError(f"Grid resolution must be at least 2, got {self.resolution}")

    def to_dict(self) -> dict:
        return {"box": self.box.to_list(), "resolution": self.resolution}

    @classmethod
    def from_dict(cls, data: dict) -> GridConfig:
        _check_keys(cls, data, "grids[]")
        data = dict(data)
        if "box" in data:
            data["box"] = _box(data["box"], "grids[].box")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of a train / optimize / evaluate run."""

    name: str = "duffing"
    system: SystemConfig = SystemConfig()
    dictionary: DictionaryConfig = DictionaryConfig()
    data: DataConfig = DataConfig()
    reduction: ReductionConfig = ReductionConfig()
    grids: tuple[GridConfig, ...] = (GridConfig(Box.square(1.0)), GridConfig(Box.square(2.0)))
    output_dir: str = "results"
    threads: int | None = None

    def validate(self):
        """
        Validate every section against the others.

        Raises:
            ConfigError: Naming the offending field
        """
        self.system.validate()
        n = self.system.dim
        self.dictionary.validate(n)
        self.data.validate(n)
        M = self.dictionary.size(n)
        self.reduction.validate(M - self.dictionary.head(n))
        for grid in self.grids:
            grid.validate(n)
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")

    @property
    def n(self) -> int:
        return self.system.dim

    @property
    def M(self) -> int:
        return self.dictionary.size(self.n)

    @property
    def s(self) -> int:
        return self.dictionary.head(self.n)

    def with_seed(self, seed: int) -> ExperimentConfig:
        """Reseed all streams: train = seed, test = seed + 1, init = seed + 2."""
        data = replace(self.data, train_seed=seed, test_seed=seed + 1, init_seed=seed + 2)
        return replace(self, data=data)

    def with_overrides(
        self,
        seed: int | None = None,
        threads: int | None = None,
        output_dir: str | None = None,
    ) -> ExperimentConfig:
        """Apply command-line overrides and revalidate."""
        config = self if seed is None else self.with_seed(seed)
        if threads is not None:
            config = replace(config, threads=threads)
        if output_dir is not None:
            config = replace(config, output_dir=str(output_dir))
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "system": self.system.to_dict(),
            "dictionary": self.dictionary.to_dict(),
            "data": self.data.to_dict(),
            "reduction": self.reduction.to_dict(),
            "grids": [g.to_dict() for g in self.grids],
            "output_dir": self.output_dir,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        """
        Create from a dictionary; missing sections take their defaults.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        _check_keys(cls, data, "config")
        data = dict(data)
        sections = {
            "system": SystemConfig,
            "dictionary": DictionaryConfig,
            "data": DataConfig,
            "reduction": ReductionConfig,
        }
        try:
            for key, section in sections.items():
                if key in data:
                    data[key] = section.from_dict(data[key])
            if "grids" in data:
                data["grids"] = tuple(GridConfig.from_dict(g) for g in data["grids"])
            config = cls(**data)
        except TypeError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        config.validate()
        return config

    def save(self, filepath: str | Path, indent: int = 2) -> None:
        with open(filepath, "w") as f:
            json.dump(self.to_dict(), f, indent=indent)

    @classmethod
    def load(cls, filepath: str | Path) -> ExperimentConfig:
        """
        Load a JSON configuration file.

        Raises:
            ConfigError: If the file is not valid JSON or fails validation
        """
        try:
            with open(filepath) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{filepath}: not valid JSON ({e})") from e
        return cls.from_dict(data)

    @classmethod
    def duffing(cls, scale: str = "full") -> ExperimentConfig:
        """
        Unforced, undamped Duffing oscillator with degree-7 monomials (M = 36).

        full: L=5000, J=100, 81 x 81 grids. desk: L=2000, J=50, 41 x 41 grids.
        Both use N=20, s=2, r=3, dt=0.1 on [-1, 1]^2 and start the
        optimiser from the coordinate Krylov subspace.
        """
        if scale not in SCALES:
            raise ConfigError(f"Unknown scale {scale!r}, use one of {SCALES}")
        full = scale == "full"
        resolution = 81 if full else 41
        config = cls(
            name=f"duffing-{scale}",
            system=SystemConfig(name="duffing", dt=0.1),
            dictionary=DictionaryConfig(kind="monomial", max_degree=7, s=2),
            data=DataConfig(
                domain=Box.square(1.0), L=5000 if full else 2000, J=100 if full else 50, N=20
            ),
            reduction=ReductionConfig(r=3, init="krylov"),
            grids=(
                GridConfig(Box.square(1.0), resolution),
                GridConfig(Box.square(2.0), resolution),
            ),
            output_dir=f"results/duffing-{scale}",
        )
        config.validate()
        return config

    @classmethod
    def linear(cls) -> ExperimentConfig:
        """Linear test system with the degree-1 dictionary (x1, x2, 1) and r = 1."""
        config = cls(
            name="linear",
            system=SystemConfig(name="linear", dt=0.1),
            dictionary=DictionaryConfig(kind="monomial", max_degree=1, s=2),
            data=DataConfig(domain=Box.square(1.0), L=200, J=10, N=10),
            reduction=ReductionConfig(r=1),
            grids=(GridConfig(Box.square(1.0), 11),),
            output_dir="results/linear",
        )
        config.validate()
        return config
