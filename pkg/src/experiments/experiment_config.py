"""
Experiment configuration: INI-style sections validated by pydantic models
"""

import configparser
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import Config
from src.exceptions import ConfigurationError
from src.model.model_core import PARAM_KEYS, ModelParams
from src.simulation.perturbations import InitialCondition

COMMANDS = (
    "simulate",
    "dispersion",
    "stability-map",
    "critical-b",
    "threshold-curves",
    "threshold-amplitude",
    "decompose",
    "wavelength-scan",
    "galerkin",
    "truncation-study",
    "param-study",
    "well-mixed",
    "negative-control",
)

SECTIONS = ("run", "params", "grid", "perturbation", "sweep", "analysis")

StateName = Literal["trivial", "extinction-of-v", "extinction-of-u", "coexistence"]


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSettings(_Section):
    command: Optional[str] = None
    preset: Optional[str] = None
    output_dir: Optional[str] = None
    require_convergence: bool = False
    target: str = ""
    tolerance: str = ""
    workers: Optional[int] = None
    write_dat: bool = True

    @field_validator("command")
    @classmethod
    def _known_command(cls, value):
        if value is not None and value not in COMMANDS:
            raise ValueError(f"unknown command '{value}'")
        return value


class GridSettings(_Section):
    dx: float = Field(default=Config.SIMULATION["dx"], gt=0)
    t_max: float = Field(default=Config.SIMULATION["t_max"], gt=0)
    tol: float = Field(default=Config.SIMULATION["tol"], gt=0)
    steady_window: int = Field(default=Config.SIMULATION["steady_window"], ge=1)
    integrator: Literal["euler", "bdf"] = Config.SIMULATION["integrator"]
    chemotaxis_scheme: Literal["centered", "upwind"] = Config.SIMULATION["chemotaxis_scheme"]
    output_times: List[float] = []

    @field_validator("output_times", mode="before")
    @classmethod
    def _split_times(cls, value):
        return _split_list(value)

    def sim_options(self) -> Dict[str, Any]:
        options: Dict[str, Any] = {
            "t_max": self.t_max,
            "tol": self.tol,
            "integrator": self.integrator,
            "chemotaxis_scheme": self.chemotaxis_scheme,
        }
        if self.integrator == "euler":
            options["steady_window"] = self.steady_window
        return options


class PerturbationSpec(_Section):
    base_state: StateName = "coexistence"
    kind: Literal["noise", "cosine", "finite-u", "finite-v", "finite-c", "none"] = "noise"
    amplitude: float = Field(default=1e-3, ge=0)
    seed: int = Config.SIMULATION["seed"]
    width_fraction: float = Field(default=Config.SIMULATION["width_fraction"], gt=0, le=1)
    mode_index: int = Field(default=1, ge=0)
    center_fraction: float = Field(default=0.5, ge=0, le=1)

    def to_initial(self) -> InitialCondition:
        return InitialCondition(
            base_state=self.base_state,
            kind=self.kind,
            amplitude=self.amplitude,
            seed=self.seed,
            width_fraction=self.width_fraction,
            mode_index=self.mode_index,
            center_fraction=self.center_fraction,
        )


class SweepSpec(_Section):
    parameter: Optional[str] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = None
    values: List[float] = []

    @field_validator("values", mode="before")
    @classmethod
    def _split_values(cls, value):
        return _split_list(value)

    @field_validator("parameter")
    @classmethod
    def _known_parameter(cls, value):
        if value is not None and value not in PARAM_KEYS:
            raise ValueError(f"unknown sweep parameter '{value}'")
        return value

    @property
    def active(self) -> bool:
        return self.parameter is not None

    def samples(self) -> List[float]:
        """Explicit values, else start..stop inclusive in steps of step"""
        if self.values:
            return [float(v) for v in self.values]
        if None in (self.start, self.stop, self.step) or self.step <= 0:
            raise ConfigurationError("sweep needs 'values' or 'start', 'stop' and a positive 'step'")
        count = int(round((self.stop - self.start) / self.step)) + 1
        return [float(v) for v in np.round(self.start + self.step * np.arange(count), 12)]


class AnalysisSettings(_Section):
    state: StateName = "coexistence"
    k: float = Field(default=Config.STABILITY["k"], ge=0)
    k_min: float = Field(default=Config.STABILITY["k_min"], ge=0)
    k_max: float = Field(default=Config.STABILITY["k_max"], gt=0)
    n_points: int = Field(default=Config.STABILITY["n_points"], ge=2)
    union_k_points: int = Field(default=40, ge=1)
    b_min: float = Field(default=0.05, gt=0)
    b_max: float = Field(default=0.95, gt=0)
    b_steps: int = Field(default=19, ge=2)
    b_search_min: float = Config.STABILITY["b_search_min"]
    b_search_max: float = Config.STABILITY["b_search_max"]
    k_search_min: float = Config.STABILITY["k_search_min"]
    k_search_max: float = Config.STABILITY["k_search_max"]
    M: int = Field(default=Config.SPECTRAL["M"], ge=0)
    M_values: List[int] = []
    M_max: int = Field(default=3, ge=1)
    threshold: float = Field(default=Config.SPECTRAL["dominant_threshold"], gt=0)
    amplitude_lo: float = Field(default=0.0, ge=0, le=1)
    amplitude_hi: float = Field(default=1.0, gt=0, le=1)
    amplitude_tol: float = Field(default=Config.SIMULATION["amplitude_tol"], gt=0)
    L_min: float = Field(default=1.0, gt=0)
    L_max: float = Field(default=50.0, gt=0)
    L_step: float = Field(default=1.0, gt=0)
    mode_budget: int = Field(default=Config.SPECTRAL["scan_modes"], ge=2)
    seed_source: Literal["simulation", "default"] = "simulation"
    residual_method: Literal["quadrature", "convolution"] = "quadrature"
    orientation: Literal["none", "alpha1-positive", "alpha1-negative"] = "none"
    simulate: bool = False
    profile_csv: Optional[str] = None
    # Reference built from a half-wavelength of the pattern simulated at this L
    window_source_L: Optional[float] = Field(default=None, gt=0)
    require_pattern: bool = False

    @field_validator("M_values", mode="before")
    @classmethod
    def _split_orders(cls, value):
        return _split_list(value)

    def L_values(self) -> List[float]:
        count = int(round((self.L_max - self.L_min) / self.L_step)) + 1
        return [float(v) for v in np.round(self.L_min + self.L_step * np.arange(count), 12)]

    def galerkin_orders(self) -> List[int]:
        return [int(m) for m in self.M_values] or [self.M_max]


class ExperimentConfig(_Section):
    """Everything one run needs; every default is echoed into the manifest"""

    run: RunSettings = RunSettings()
    params: ModelParams = ModelParams()
    grid: GridSettings = GridSettings()
    perturbation: PerturbationSpec = PerturbationSpec()
    sweep: SweepSpec = SweepSpec()
    analysis: AnalysisSettings = AnalysisSettings()

    @property
    def command(self) -> Optional[str]:
        return self.run.command

    def flatten(self) -> Dict[str, Any]:
        """section.key -> value for all settings, in declaration order"""
        flat: Dict[str, Any] = {}
        for section in SECTIONS:
            for key, value in getattr(self, section).model_dump().items():
                if isinstance(value, list):
                    value = ", ".join(str(v) for v in value)
                flat[f"{section}.{key}"] = "none" if value is None else value
        return flat

    def to_config_text(self) -> str:
        blocks = []
        flat = self.flatten()
        for section in SECTIONS:
            blocks.append(f"[{section}]")
            prefix = f"{section}."
            blocks.extend(f"{k[len(prefix):]} = {v}" for k, v in flat.items() if k.startswith(prefix))
            blocks.append("")
        return "\n".join(blocks)


def read_config_file(path: Path) -> Dict[str, Dict[str, str]]:
    """Raw sections of an INI-style config file"""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as stream:
            parser.read_file(stream)
    except (OSError, configparser.Error) as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e

    raw: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigurationError(f"Unknown config section [{section}] in {path}")
        raw[section] = dict(parser.items(section))
    return raw


def merge_raw(
    base: Dict[str, Dict[str, Any]], update: Dict[str, Dict[str, Any]]
) -> Dict[str, Dict[str, Any]]:
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in update.items():
        merged.setdefault(section, {}).update(values)
    return merged


def parse_overrides(assignments: Sequence[str]) -> Dict[str, Dict[str, str]]:
    """
    Turn --set arguments into raw sections

    "section.key=value" targets that section; a bare model parameter
    ("b2=1.7") targets [params].
    """
    raw: Dict[str, Dict[str, str]] = {}
    for assignment in assignments or []:
        if "=" not in assignment:
            raise ConfigurationError(f"Override must look like key=value, got '{assignment}'")
        key, value = (part.strip() for part in assignment.split("=", 1))
        if "." in key:
            section, key = key.split(".", 1)
        elif key in PARAM_KEYS:
            section = "params"
        else:
            raise ConfigurationError(f"Override key '{key}' needs a section prefix")
        if section not in SECTIONS:
            raise ConfigurationError(f"Unknown config section '{section}' in override")
        raw.setdefault(section, {})[key] = value
    return raw


def build_config(raw: Dict[str, Dict[str, Any]]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**raw)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


def load_experiment_config(
    command: str = None,
    config_path: Path = None,
    preset: str = None,
    overrides: Sequence[str] = (),
    output_dir: str = None,
) -> ExperimentConfig:
    """
    Assemble a config from preset, file and overrides (later sources win)

    Args:
        command: Command from the command line
        config_path: Optional INI file
        preset: Optional figure preset name
        overrides: --set assignments
        output_dir: --out directory

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigurationError: on unknown keys, bad values or conflicting commands
    """
    from src.experiments.presets import preset_raw

    raw: Dict[str, Dict[str, Any]] = {}
    if preset:
        raw = merge_raw(raw, preset_raw(preset))
    if config_path:
        raw = merge_raw(raw, read_config_file(Path(config_path)))
    raw = merge_raw(raw, parse_overrides(overrides))

    preset_command = raw.get("run", {}).get("command")
    if command and preset_command and command != preset_command and preset:
        raise ConfigurationError(f"Preset '{preset}' runs '{preset_command}', not '{command}'")
    if command:
        raw.setdefault("run", {})["command"] = command
    if preset:
        raw.setdefault("run", {})["preset"] = preset
    if output_dir:
        raw.setdefault("run", {})["output_dir"] = output_dir

    config = build_config(raw)
    if config.command is None:
        raise ConfigurationError("No command given on the command line, in the config or preset")
    return config
