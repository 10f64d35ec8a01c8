"""
   Copyright 2024 obsideband contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""
"""Run configuration: JSON schema, parsing and validation."""

import dataclasses
import json
import math
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

from tabulate import tabulate

from obsideband.enums import OutputFormat, Spacing
from obsideband.errors import ConfigError, ParamError
from obsideband.params import ModelParams
from obsideband.sideband import max_depth

# yapf: disable
schema = {
    'model': {
        'n_eff': {'type': 'number', 'default': None, 'description': 'Effective atom number (required, > 0)'},
        'gamma': {'type': 'number', 'default': 1.0, 'description': 'Atomic damping rate, the frequency unit (> 0)'},
        'r': {'type': 'number', 'default': 0.0, 'description': 'Squeeze parameter (>= 0)'},
        'theta': {'type': 'number', 'default': 0.0, 'description': 'Squeezed field phase relative to the pump (rad)'},
        'delta': {'type': 'number', 'default': 0.0, 'description': 'Atom-pump detuning'},
        'epsilon': {'type': 'number', 'default': 0.0, 'description': 'Twice the pump-squeezed carrier detuning'},
        'mu': {'type': 'number', 'default': 1.0, 'description': 'Dipole moment (> 0)'},
    },
    'sweep': {
        'e0_min': {'type': 'number', 'default': 0.0, 'description': 'Smallest central (or total) field modulus'},
        'e0_max': {'type': 'number', 'default': 20.0, 'description': 'Largest central (or total) field modulus'},
        'points': {'type': 'integer', 'default': 400, 'description': 'Number of grid points (>= 3)'},
        'spacing': {'type': 'string', 'default': 'linear', 'description': 'Grid spacing: linear or log'},
    },
    'solver': {
        'depth': {'type': 'integer|"auto"', 'default': 2, 'description': f'Continued fraction depth (1-{max_depth})'},
        'tol': {'type': 'number', 'default': 1e-10, 'description': 'Integrator relative tolerance'},
        'settle_tol': {'type': 'number', 'default': 1e-9, 'description': 'Stroboscopic convergence threshold'},
        'max_periods': {'type': 'integer', 'default': 5000, 'description': 'Maximum periods integrated when settling'},
        'n_max': {'type': 'integer', 'default': 8, 'description': 'Highest harmonic extracted from an orbit'},
        'samples': {'type': 'integer', 'default': 512, 'description': 'Samples on a settled period (>= 512)'},
        'threads': {'type': 'integer|null', 'default': None, 'description': 'Sweep worker threads'},
    },
    'output': {
        'path': {'type': 'string|null', 'default': None, 'description': 'Output file (stdout when null)'},
        'format': {'type': 'string', 'default': 'csv', 'description': 'Output format: csv or json'},
    },
}
# yapf: enable


@dataclass(frozen=True)
class SweepConfig:
    e0_min: float = 0.0
    e0_max: float = 20.0
    points: int = 400
    spacing: Spacing = Spacing.linear


@dataclass(frozen=True)
class SolverConfig:
    depth: Optional[int] = 2
    """ Continued fraction depth, None for automatic. """

    tol: float = 1e-10
    settle_tol: float = 1e-9
    max_periods: int = 5000
    n_max: int = 8
    samples: int = 512
    threads: Optional[int] = None


@dataclass(frozen=True)
class OutputConfig:
    path: Optional[str] = None
    format: OutputFormat = OutputFormat.csv


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    model: ModelParams
    sweep: SweepConfig = field(default_factory=SweepConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved configuration as JSON compatible nested dictionaries."""
        solver = dataclasses.asdict(self.solver)
        solver["depth"] = "auto" if self.solver.depth is None else self.solver.depth
        return dict(
            model=self.model.to_dict(),
            sweep={**dataclasses.asdict(self.sweep), "spacing": self.sweep.spacing.value},
            solver=solver,
            output={**dataclasses.asdict(self.output), "format": self.output.format.value},
        )


def schema_table() -> str:
    """Return a table of the configuration keys, their types and defaults."""
    headers = dict(key="Key", type="Type", default="Default", description="Description")
    data = []
    for section, keys in schema.items():
        for key, val in keys.items():
            default = "required" if val["default"] is None and key == "n_eff" else json.dumps(val["default"])
            data.append(dict(key=f"{section}.{key}", type=val["type"], default=default, description=val["description"]))
    return tabulate(data, headers=headers, tablefmt="simple")


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {value!r}")
    return float(value)


def _integer(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _choice(key: str, value: Any, enum):
    try:
        return enum(value)
    except ValueError:
        choices = ", ".join(e.value for e in enum)
        raise ConfigError(key, f"expected one of {choices}, got {value!r}")


def _section(document: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = document.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(name, f"expected an object, got {section!r}")
    unknown = set(section) - set(schema[name])
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{name}.{key}", "unknown key")
    return section


def _parse_model(document: Dict[str, Any]) -> ModelParams:
    top_level = {k: document[k] for k in schema["model"] if k in document}
    if "model" in document and top_level:
        raise ConfigError("model", "model keys must be either at the top level or inside 'model', not both")
    prefix = "model." if "model" in document else ""
    section = _section(document, "model") if "model" in document else top_level
    values = {key: _number(f"{prefix}{key}", value) for key, value in section.items()}
    try:
        # placeholder n_eff so the other fields are range checked first
        params = ModelParams(**{"n_eff": 1.0, **values})
    except ParamError as ex:
        raise ConfigError(f"{prefix}{ex.field}", str(ex)) from ex
    if "n_eff" not in section:
        raise ConfigError(f"{prefix}n_eff", "required key missing")
    return params


def _parse_sweep(document: Dict[str, Any]) -> SweepConfig:
    section = _section(document, "sweep")
    values = dataclasses.asdict(SweepConfig())
    for key in ("e0_min", "e0_max"):
        if key in section:
            values[key] = _number(f"sweep.{key}", section[key])
    if "points" in section:
        values["points"] = _integer("sweep.points", section["points"])
    if "spacing" in section:
        values["spacing"] = _choice("sweep.spacing", section["spacing"], Spacing)

    if values["e0_min"] < 0:
        raise ConfigError("sweep.e0_min", f"must be >= 0, got {values['e0_min']!r}")
    if values["e0_max"] <= values["e0_min"]:
        raise ConfigError("sweep.e0_max", f"must be > e0_min ({values['e0_min']!r}), got {values['e0_max']!r}")
    if values["points"] < 3:
        raise ConfigError("sweep.points", f"must be >= 3, got {values['points']!r}")
    if values["spacing"] == Spacing.log and values["e0_min"] <= 0:
        raise ConfigError("sweep.spacing", "log spacing needs e0_min > 0")
    return SweepConfig(**values)


def _parse_solver(document: Dict[str, Any]) -> SolverConfig:
    section = _section(document, "solver")
    values = dataclasses.asdict(SolverConfig())
    if "depth" in section:
        depth = section["depth"]
        if depth == "auto":
            values["depth"] = None
        else:
            depth = _integer("solver.depth", depth)
            if not 1 <= depth <= max_depth:
                raise ConfigError("solver.depth", f"must be in [1, {max_depth}] or 'auto', got {depth!r}")
            values["depth"] = depth
    for key in ("tol", "settle_tol"):
        if key in section:
            values[key] = _number(f"solver.{key}", section[key])
            if values[key] <= 0:
                raise ConfigError(f"solver.{key}", f"must be > 0, got {values[key]!r}")
    minimums = dict(max_periods=1, n_max=1, samples=512)
    for key, minimum in minimums.items():
        if key in section:
            values[key] = _integer(f"solver.{key}", section[key])
            if values[key] < minimum:
                raise ConfigError(f"solver.{key}", f"must be >= {minimum}, got {values[key]!r}")
    if section.get("threads") is not None:
        values["threads"] = _integer("solver.threads", section["threads"])
        if values["threads"] < 1:
            raise ConfigError("solver.threads", f"must be >= 1, got {values['threads']!r}")
    return SolverConfig(**values)


def _parse_output(document: Dict[str, Any]) -> OutputConfig:
    section = _section(document, "output")
    path = section.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", f"expected a string or null, got {path!r}")
    format = _choice("output.format", section["format"], OutputFormat) if "format" in section else OutputFormat.csv
    return OutputConfig(path=path, format=format)


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a JSON run configuration.

    Parameters
    ----------
    text: str
        JSON document.  Model keys may sit at the top level or inside a ``"model"`` object; ``"sweep"``,
        ``"solver"`` and ``"output"`` objects are optional.  See :data:`schema` for keys and defaults.

    Returns
    -------
    RunConfig
        Validated configuration with defaults filled in.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as ex:
        raise ConfigError("(document)", f"invalid JSON: {ex}") from ex
    if not isinstance(document, dict):
        raise ConfigError("(document)", "expected a JSON object")

    known = set(schema) | set(schema["model"])
    unknown = set(document) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")

    return RunConfig(
        model=_parse_model(document),
        sweep=_parse_sweep(document),
        solver=_parse_solver(document),
        output=_parse_output(document),
    )


def load_config(path: Union[str, pathlib.Path]) -> RunConfig:
    """Read and parse a UTF-8 JSON configuration file."""
    return parse_config(pathlib.Path(path).read_text(encoding="utf-8"))
