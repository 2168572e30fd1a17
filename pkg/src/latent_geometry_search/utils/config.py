import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

from .errors import ValidationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_CONFIG_PATH = 'config.json'
WORKERS_ENV = 'LATENT_GEOMETRY_WORKERS'

METHODS = ("gh-bo", "naive-bo", "unweighted-bo", "random")


@dataclass(frozen=True)
class GhSettings:
    quadrature_res: int = 20000
    grid_step: float = 1e-5
    res_r: int = 200
    res_t: int = 200
    sphere_res_r: int = 100
    sphere_res_t: int = 100
    offset_steps: int = 100
    offset_range: float = 0.5
    shuffle_seed: int = 0
    # overrides c = 2 max(G1, G2) when set
    frequency: Optional[float] = None

    def validate(self):
        if self.quadrature_res < 1000:
            raise ValidationError(f"quadrature_res must be >= 1000, got {self.quadrature_res}")
        if not 0 < self.grid_step <= 1e-4:
            raise ValidationError(f"grid_step must lie in (0, 1e-4], got {self.grid_step}")
        for name in ("res_r", "res_t", "sphere_res_r", "sphere_res_t"):
            if getattr(self, name) < 2:
                raise ValidationError(f"{name} must be >= 2, got {getattr(self, name)}")
        if self.offset_steps < 1:
            raise ValidationError(f"offset_steps must be >= 1, got {self.offset_steps}")
        if self.offset_range < 0:
            raise ValidationError(f"offset_range must be non-negative, got {self.offset_range}")
        if self.frequency is not None and not self.frequency > 0:
            raise ValidationError(f"frequency must be positive, got {self.frequency}")


@dataclass(frozen=True)
class SpaceSettings:
    max_factors: int = 7
    fixed_size: Optional[int] = None
    variant: str = "gh"
    weights: str = "exact"

    def validate(self):
        if self.max_factors < 1:
            raise ValidationError(f"max_factors must be >= 1, got {self.max_factors}")
        if self.fixed_size is not None and self.fixed_size < 1:
            raise ValidationError(f"fixed_size must be >= 1, got {self.fixed_size}")
        if self.variant not in ("gh", "unweighted", "complete"):
            raise ValidationError(f"Unknown graph variant '{self.variant}'")
        if self.weights not in ("exact", "rounded"):
            raise ValidationError(f"Unknown weight mode '{self.weights}'")


@dataclass(frozen=True)
class BenchSettings:
    factors: int = 13
    seed: int = 0
    pad_euclidean: bool = True

    def validate(self):
        if self.factors < 1:
            raise ValidationError(f"factors must be >= 1, got {self.factors}")


@dataclass(frozen=True)
class SearchSettings:
    methods: List[str] = field(default_factory=lambda: list(METHODS))
    budget: int = 60
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    n_init: int = 3
    beta_min: float = 1e-2
    beta_max: float = 1e2
    beta_count: int = 25
    noise_variance: float = 1e-6
    freeze_beta: bool = False
    # runs end once a value <= stop_value is observed; None runs the full budget
    stop_value: Optional[float] = 0.0

    def validate(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise ValidationError(f"Unknown or empty method list: {self.methods}")
        if not self.seeds:
            raise ValidationError("At least one seed is required")
        if self.n_init < 1 or self.budget < self.n_init:
            raise ValidationError(f"Need budget >= n_init >= 1, got budget={self.budget}, n_init={self.n_init}")
        if not 0 < self.beta_min <= self.beta_max or self.beta_count < 1:
            raise ValidationError("Beta grid needs 0 < beta_min <= beta_max and beta_count >= 1")
        if self.noise_variance < 0:
            raise ValidationError(f"noise_variance must be non-negative, got {self.noise_variance}")


@dataclass(frozen=True)
class RunConfig:
    """
    Every command parameter with its default. Built-in defaults are overlaid by
    config.json and then by command-line flags.
    """
    gh: GhSettings = field(default_factory=GhSettings)
    space: SpaceSettings = field(default_factory=SpaceSettings)
    bench: BenchSettings = field(default_factory=BenchSettings)
    search: SearchSettings = field(default_factory=SearchSettings)
    logging: Dict[str, Any] = field(default_factory=lambda: {"level": "INFO", "dir": "logs", "file": True})

    def validate(self):
        self.gh.validate()
        self.space.validate()
        self.bench.validate()
        self.search.validate()


def _read_config_file(path: str) -> Dict[str, Any]:
    """
    Loads the raw configuration dictionary. A missing or broken file yields an empty dict.
    """
    try:
        with open(path, 'r') as f:
            config = json.load(f)
    except (FileNotFoundError, json.JSONDecodeError) as e:
        logger.warning(f"Could not load configuration from {path}: {e}. Using defaults.")
        return {}
    version = config.get('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"Unsupported config schema_version {version} in {path}; expected {SCHEMA_VERSION}")
    return config


def _section(settings_cls, raw: Dict[str, Any], name: str):
    known = {f.name for f in fields(settings_cls)}
    section = raw.get(name, {})
    if not isinstance(section, dict):
        raise ValidationError(f"Config section '{name}' must be an object")
    unknown = sorted(set(section) - known)
    if unknown:
        raise ValidationError(f"Unknown keys in config section '{name}': {unknown}")
    return settings_cls(**section)


def load_logging_config(path: str = DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    """
    Loads the logging section from config.json.
    """
    try:
        with open(path, 'r') as f:
            config = json.load(f)
        return config['logging']
    except (FileNotFoundError, json.JSONDecodeError, KeyError):
        # logging is not configured yet, so there is nobody to warn
        return {"level": "INFO", "dir": "logs", "file": True}


def load_run_config(path: str = DEFAULT_CONFIG_PATH) -> RunConfig:
    """
    Loads every section of config.json into a RunConfig.
    """
    raw = _read_config_file(path)
    try:
        config = RunConfig(
            gh=_section(GhSettings, raw, 'gh'),
            space=_section(SpaceSettings, raw, 'space'),
            bench=_section(BenchSettings, raw, 'bench'),
            search=_section(SearchSettings, raw, 'search'),
            logging=raw.get('logging', RunConfig().logging),
        )
    except TypeError as e:
        raise ValidationError(f"Malformed configuration in {path}: {e}") from e
    logger.debug(f"Loaded run configuration from {path}: {config}")
    return config


def override(settings, **flags):
    """Returns a copy of a settings dataclass with every non-None flag applied."""
    changes = {name: value for name, value in flags.items() if value is not None}
    return replace(settings, **changes)


def worker_count() -> int:
    """
    Number of worker processes for parallel sweeps: LATENT_GEOMETRY_WORKERS or all cores.
    """
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"Ignoring non-integer {WORKERS_ENV}={raw!r}")
        else:
            if value >= 1:
                return value
            logger.warning(f"Ignoring non-positive {WORKERS_ENV}={raw!r}")
    return os.cpu_count() or 1
