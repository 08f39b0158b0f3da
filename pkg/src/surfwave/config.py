"""Run configuration files and reproducible run manifests.

Configurations are YAML mappings with an explicit ``schema_version``::

    schema_version: 1
    physical: {v1: 0.0, b1: 0.0, h1: 1.0, nu: 0.5}
    root_index: 0
    grid: {n_modes: 256, length: 6.283185307179586}
    solver: {formulation: SpatialHilbert, dt_safety: 0.5, t_end: 1.0}
    norms: {s_values: [0, 2.5, 3], s_prime: 2.5}
    profile: {name: cosine, amplitude: 1.0}
    seed: 0
    output: {snapshot_every: 0.1}

Every section is optional; missing keys take the library defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import yaml

from .analysis import NormLadder
from .dispersion import PhysicalConfig
from .solver import Formulation, SolverConfig
from .spectral import SpectralGrid

SCHEMA_VERSION = 1
DEFAULT_PHYSICAL = {"v1": 0.0, "b1": 0.0, "h1": 1.0, "nu": 0.5}
SECTIONS = {"schema_version", "physical", "root_index", "grid", "solver", "norms", "profile", "seed", "output",
            "fields", "bench", "verify"}


class ConfigError(ValueError):
    """Configuration cannot be parsed or violates a constraint."""


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(value)


def _build(kind, params: dict, label: str):
    names = {f.name for f in dataclasses.fields(kind)}
    unknown = set(params) - names
    if unknown:
        raise ConfigError(f"unknown keys in {label}: {sorted(unknown)}")
    try:
        return kind(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {label}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalConfig = field(default_factory=lambda: PhysicalConfig(**DEFAULT_PHYSICAL))
    root_index: int = 0
    grid: SpectralGrid = field(default_factory=lambda: SpectralGrid(256))
    solver: SolverConfig = field(default_factory=SolverConfig)
    norms: NormLadder = field(default_factory=NormLadder)
    profile: dict = field(default_factory=lambda: {"name": "cosine"})
    seed: int = 0
    snapshot_every: float | None = None
    fields: dict = field(default_factory=dict)
    bench: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, raw: Any) -> "RunConfig":
        if raw is None:
            raw = {"schema_version": SCHEMA_VERSION}
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
        unknown = set(raw) - SECTIONS
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        version = raw.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        physical = _build(PhysicalConfig, {**DEFAULT_PHYSICAL, **_section(raw, "physical")}, "physical")
        grid_raw = {"n_modes": 256, **_section(raw, "grid")}
        if "n_modes" in grid_raw and isinstance(grid_raw["n_modes"], float) and grid_raw["n_modes"].is_integer():
            grid_raw["n_modes"] = int(grid_raw["n_modes"])
        grid = _build(SpectralGrid, grid_raw, "grid")
        solver_raw = _section(raw, "solver")
        if "formulation" in solver_raw:
            try:
                solver_raw["formulation"] = Formulation.parse(str(solver_raw["formulation"]))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        solver = _build(SolverConfig, solver_raw, "solver")
        norms_raw = _section(raw, "norms")
        if "s_values" in norms_raw:
            norms_raw["s_values"] = tuple(norms_raw["s_values"])
        norms = _build(NormLadder, norms_raw, "norms")
        profile = _section(raw, "profile") or {"name": "cosine"}
        if "name" not in profile:
            raise ConfigError("profile needs a name")
        output = _section(raw, "output")
        extra = set(output) - {"snapshot_every"}
        if extra:
            raise ConfigError(f"unknown keys in output: {sorted(extra)}")
        snap = output.get("snapshot_every")
        if snap is not None and not (isinstance(snap, (int, float)) and math.isfinite(snap) and snap > 0):
            raise ConfigError(f"snapshot_every must be positive, got {snap!r}")
        root_index = raw.get("root_index", 0)
        seed = raw.get("seed", 0)
        for name, value in (("root_index", root_index), ("seed", seed)):
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(f"{name} must be a nonnegative integer, got {value!r}")
        verify = _section(raw, "verify")
        for sig in verify.get("sigmas", ()):
            if not (isinstance(sig, (int, float)) and 0 < sig <= 1):
                raise ConfigError(f"verify.sigmas entries must lie in (0, 1], got {sig!r}")
        return cls(physical, root_index, grid, solver, norms, profile, seed,
                   None if snap is None else float(snap), _section(raw, "fields"), _section(raw, "bench"), verify)

    def with_overrides(self, formulation=None, n_modes=None, length=None, t_end=None, seed=None,
                       snapshot_every=None) -> "RunConfig":
        """Apply command-line overrides, revalidating the touched pieces."""
        try:
            solver = self.solver
            if formulation is not None:
                solver = dataclasses.replace(solver, formulation=Formulation.parse(formulation))
            if t_end is not None:
                solver = dataclasses.replace(solver, t_end=t_end)
            grid = self.grid
            if n_modes is not None or length is not None:
                grid = SpectralGrid(n_modes if n_modes is not None else grid.n_modes,
                                    length if length is not None else grid.length)
            if snapshot_every is not None and not snapshot_every > 0:
                raise ValueError("snapshot_every must be positive")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if seed is not None and seed < 0:
            raise ConfigError("seed must be nonnegative")
        return dataclasses.replace(self, solver=solver, grid=grid,
                                   seed=self.seed if seed is None else seed,
                                   snapshot_every=self.snapshot_every if snapshot_every is None else snapshot_every)

    def to_mapping(self) -> dict:
        solver = dataclasses.asdict(self.solver)
        solver["formulation"] = self.solver.formulation.value
        out = {
            "schema_version": SCHEMA_VERSION,
            "physical": dataclasses.asdict(self.physical),
            "root_index": self.root_index,
            "grid": {"n_modes": self.grid.n_modes, "length": self.grid.length},
            "solver": solver,
            "norms": {"s_values": list(self.norms.s_values), "s_prime": self.norms.s_prime},
            "profile": dict(self.profile),
            "seed": self.seed,
            "output": {"snapshot_every": self.snapshot_every},
        }
        for name in ("fields", "bench", "verify"):
            if getattr(self, name):
                out[name] = dict(getattr(self, name))
        return out


def load_config(path) -> RunConfig:
    """Parse a YAML file; any read or validation problem becomes :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from None
    return RunConfig.from_mapping(raw)


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run, with a hash over the evolution-affecting part."""

    physical: PhysicalConfig
    chosen_root_index: int
    grid: SpectralGrid
    solver: SolverConfig
    norms: NormLadder
    seed: int
    profile: dict
    artifact_version: str
    snapshot_every: float | None = None
    root: dict | None = None

    @classmethod
    def from_config(cls, cfg: RunConfig, root: dict | None = None) -> "RunManifest":
        return cls(cfg.physical, cfg.root_index, cfg.grid, cfg.solver, cfg.norms, cfg.seed, dict(cfg.profile),
                   artifact_version(), cfg.snapshot_every, root)

    def hashed_content(self) -> dict:
        solver = dataclasses.asdict(self.solver)
        solver["formulation"] = self.solver.formulation.value
        return {
            "physical": dataclasses.asdict(self.physical),
            "chosen_root_index": self.chosen_root_index,
            "grid": {"n_modes": self.grid.n_modes, "length": self.grid.length},
            "solver": solver,
            "norms": {"s_values": list(self.norms.s_values), "s_prime": self.norms.s_prime},
            "seed": self.seed,
            "profile": self.profile,
            "snapshot_every": self.snapshot_every,
            "artifact_version": self.artifact_version,
        }

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(_canonical_json(self.hashed_content()).encode()).hexdigest()

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, **self.hashed_content(), "root": self.root}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        solver = dict(data["solver"])
        solver["formulation"] = Formulation.parse(solver["formulation"])
        manifest = cls(PhysicalConfig(**data["physical"]), int(data["chosen_root_index"]),
                       SpectralGrid(int(data["grid"]["n_modes"]), float(data["grid"]["length"])),
                       SolverConfig(**solver),
                       NormLadder(tuple(data["norms"]["s_values"]), data["norms"]["s_prime"]),
                       int(data["seed"]), dict(data["profile"]), str(data["artifact_version"]),
                       data.get("snapshot_every"), data.get("root"))
        stored = data.get("config_hash")
        if stored is not None and stored != manifest.config_hash:
            raise ConfigError("manifest hash does not match its content")
        return manifest

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))
