"""Run configuration: schema, YAML loading, validation, reference config.

One structured file fully determines a run (together with the master seed),
and the canonical hash of the resolved configuration is embedded in every
output file header so artifacts can be traced back to their inputs.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field

import yaml

from . import __version__
from .grid import DEFAULT_GRADING, DEFAULT_NODES


class ConfigError(ValueError):
    """Malformed, out-of-range, or unknown configuration content."""


@dataclass
class WallsConfig:
    t1: float = 1.0
    t2: float = 1.0
    kappa: float = 1.0

    def validate(self):
        if self.t1 <= 0 or self.t2 <= 0 or self.kappa <= 0:
            raise ConfigError("walls: t1, t2, kappa must be positive")
        if self.t1 > self.t2:
            raise ConfigError("walls: t1 must not exceed t2 (cold wall first)")


@dataclass
class GridConfig:
    nodes: int = DEFAULT_NODES
    grading: float = DEFAULT_GRADING

    def validate(self):
        if not 8 <= self.nodes <= 4096:
            raise ConfigError("grid: nodes must lie in [8, 4096]")
        if not 1.0 <= self.grading <= 4.0:
            raise ConfigError("grid: grading must lie in [1, 4]")


@dataclass
class QuadratureConfig:
    # Accuracy contract of the kernel-moment evaluator; informational
    # constants surfaced here so reports record them (see kernels.ABS_TOL).
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10

    def validate(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ConfigError("quadrature: tolerances must be positive")


@dataclass
class FixedPointConfig:
    damping: float = 0.5
    tol: float = 1e-8
    max_iters: int = 200
    gamma1: float = 1.0
    gamma2: float = 1.0

    def validate(self):
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError("fixed_point: damping must lie in (0, 1]")
        if self.tol <= 0 or self.max_iters < 1:
            raise ConfigError("fixed_point: tol and max_iters must be positive")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ConfigError("fixed_point: gamma1, gamma2 must be positive")


@dataclass
class MonteCarloConfig:
    particles: int = 2000
    t_end: float = 1000.0
    burn_in_fraction: float = 0.2
    seed: int = 20260810
    bins: int = 32
    batches: int = 32
    profile: str = None

    def validate(self):
        if self.particles < 1 or self.t_end <= 0:
            raise ConfigError("monte_carlo: particles and t_end must be positive")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ConfigError("monte_carlo: burn_in_fraction must lie in [0, 1)")
        if self.bins < 1 or self.batches < 2:
            raise ConfigError("monte_carlo: need bins >= 1 and batches >= 2")
        if self.seed < 0:
            raise ConfigError("monte_carlo: seed must be nonnegative")


@dataclass
class DiagnosticsConfig:
    mass_tol: float = 1e-8
    momentum_tol: float = 1e-6
    pressure_var_tol: float = 1e-4
    flux_var_tol: float = 1e-3
    weak_residual_tol: float = 1e-4
    band_slack: float = 1e-9

    def validate(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ConfigError(f"diagnostics: {name} must be positive")


@dataclass
class OutputConfig:
    dir: str = "out"
    delimiter: str = "\t"

    def validate(self):
        if self.delimiter not in ("\t", ",", ";", " "):
            raise ConfigError("output: delimiter must be tab, comma, semicolon or space")


@dataclass
class RunConfig:
    walls: WallsConfig = field(default_factory=WallsConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    fixed_point: FixedPointConfig = field(default_factory=FixedPointConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: list = field(default_factory=list)
    workers: int = 1
    force: bool = False

    def validate(self):
        for section in (self.walls, self.grid, self.quadrature,
                        self.fixed_point, self.monte_carlo, self.diagnostics,
                        self.output):
            section.validate()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for i, point in enumerate(self.sweep):
            if not isinstance(point, dict):
                raise ConfigError(f"sweep[{i}]: each point must be a mapping")
            unknown = set(point) - {"t1", "t2", "kappa"}
            if unknown:
                raise ConfigError(f"sweep[{i}]: unknown keys {sorted(unknown)}")
            if "t1" not in point or "t2" not in point:
                raise ConfigError(f"sweep[{i}]: needs t1 and t2")
        return self

    def canonical_dict(self):
        d = asdict(self)
        d["version"] = __version__
        return d

    def config_hash(self):
        blob = json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


_SECTIONS = {
    "walls": WallsConfig,
    "grid": GridConfig,
    "quadrature": QuadratureConfig,
    "fixed_point": FixedPointConfig,
    "monte_carlo": MonteCarloConfig,
    "diagnostics": DiagnosticsConfig,
    "output": OutputConfig,
}


def _build_section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"section '{name}': unknown keys {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("top level of config must be a mapping")
    known = set(_SECTIONS) | {"sweep", "workers", "force"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    kwargs = {name: _build_section(cls, data.get(name), name)
              for name, cls in _SECTIONS.items()}
    kwargs["sweep"] = data.get("sweep") or []
    if not isinstance(kwargs["sweep"], list):
        raise ConfigError("sweep must be a list of {t1, t2, kappa} mappings")
    kwargs["workers"] = data.get("workers", 1)
    kwargs["force"] = bool(data.get("force", False))
    try:
        cfg = RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    return config_from_dict(data)


REFERENCE_CONFIG = """\
# bgkslab reference configuration (all values are the defaults).
# Every run is fully determined by this file plus the seed; output files
# embed a hash of the resolved configuration.

walls:
  t1: 1.0          # cold-wall temperature (x = 0); must satisfy t1 <= t2
  t2: 1.0          # hot-wall temperature (x = 1)
  kappa: 1.0       # Knudsen number: collision rate is 1/kappa

grid:
  nodes: 64        # interior collocation nodes
  grading: 2.0     # mesh-grading exponent toward both walls

quadrature:        # accuracy contract of the moment evaluator (fixed,
  abs_tol: 1.0e-12 # recorded here so reports carry it)
  rel_tol: 1.0e-10

fixed_point:
  damping: 0.5     # Picard damping theta in (0, 1]
  tol: 1.0e-8      # stop when sup|T_{k+1}-T_k| <= tol * sqrt(t1*t2)
  max_iters: 200
  gamma1: 1.0      # admissibility constants (no canonical values exist;
  gamma2: 1.0      # defaults are conventional, not derived)

monte_carlo:
  particles: 2000
  t_end: 1000.0
  burn_in_fraction: 0.2
  seed: 20260810
  bins: 32         # spatial occupancy bins
  batches: 32      # batch-means windows for standard errors
  profile: null    # optional path to a frozen profile table from `solve`

diagnostics:
  mass_tol: 1.0e-8
  momentum_tol: 1.0e-6    # max|u|/sqrt(P)
  pressure_var_tol: 1.0e-4
  flux_var_tol: 1.0e-3
  weak_residual_tol: 1.0e-4
  band_slack: 1.0e-9      # allowed tau excursion outside [t1, t2],
                          # relative to sqrt(t1*t2)

output:
  dir: out
  delimiter: "\\t"

# sweep:           # used by the `sweep` subcommand
#   - {t1: 100.0, t2: 400.0, kappa: 1.0}
#   - {t1: 1000.0, t2: 4000.0, kappa: 1.0}

workers: 1         # threads for the particle simulation
force: false       # iterate even when the admissibility condition fails
"""


def main():
    print(REFERENCE_CONFIG, end="")


if __name__ == "__main__":
    main()
