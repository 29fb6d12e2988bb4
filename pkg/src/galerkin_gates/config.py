"""
Scenario configuration files.

Scenarios are TOML documents. The top level holds scalar settings, ``[model]``
describes the quantum system, each ``[[stages]]`` table appends one control
segment and ``[certificate]`` / ``[output]`` tune the report. See
``docs/config.md`` for the schema.
"""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import controls, models
from .errors import ConfigError

BUNDLED = ("oscillator_gate", "well_gate", "oscillator_gate_inverse_level")

_STAGE_KEYS = {
    "pulse_train": {"type", "period", "pulse_width", "amplitude", "n_periods", "transition"},
    "sinusoid": {"type", "amplitude", "frequency", "phase", "duration", "step", "clock"},
    "resonant": {"type", "transition", "amplitude", "phase", "step", "clock"},
}


@dataclass
class ModelSpec:
    kind: str
    eta: float = 0.0
    eigenvalue_scale: float = 1.0
    coupling_scale: float = 1.0
    perturbation: str = models.Perturbation.INVERSE_EIGENVALUE.value

    def build(self) -> models.QuantumModel:
        try:
            return models.QuantumModel(
                models.ModelKind(self.kind),
                eta=float(self.eta),
                eigenvalue_scale=float(self.eigenvalue_scale),
                coupling_scale=float(self.coupling_scale),
                perturbation=models.Perturbation(self.perturbation),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid model: {exc}") from exc


@dataclass
class ScenarioConfig:
    name: str
    model: ModelSpec
    N: int
    stages: list[dict]
    target: list[int] = field(default_factory=lambda: [1, 2, 3])
    initial: list[int] = field(default_factory=lambda: [1, 2, 3])
    sample_every: float | None = None
    budget: float | None = None
    resonant_periods: bool = False
    literal_spectrum: bool = False
    certificate: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.model, ModelSpec):
            if not isinstance(self.model, dict) or "kind" not in self.model:
                raise ConfigError("[model] table with a 'kind' key is required")
            unknown = set(self.model) - set(ModelSpec.__dataclass_fields__)
            if unknown:
                raise ConfigError(f"unknown model keys: {sorted(unknown)}")
            self.model = ModelSpec(**self.model)
        self.validate()

    def validate(self) -> None:
        if self.model.kind not in ("oscillator", "well"):
            raise ConfigError(f"unknown model kind {self.model.kind!r}")
        min_n = 4 if self.model.kind == "oscillator" else 5
        if int(self.N) != self.N or self.N < min_n:
            raise ConfigError(f"N must be an integer >= {min_n} for the {self.model.kind}")
        if sorted(self.target) != list(range(1, len(self.target) + 1)) or len(self.target) > 3:
            raise ConfigError(f"target {self.target} is not a permutation of 1..m, m <= 3")
        if self.sample_every is not None and not self.sample_every > 0:
            raise ConfigError("sample_every must be positive")
        if not self.stages:
            raise ConfigError("at least one [[stages]] table is required")
        for i, st in enumerate(self.stages):
            kind = st.get("type")
            if kind not in _STAGE_KEYS:
                raise ConfigError(f"stage {i}: unknown type {kind!r}")
            extra = set(st) - _STAGE_KEYS[kind]
            if extra:
                raise ConfigError(f"stage {i}: unknown keys {sorted(extra)}")
            for key in ("duration", "step", "period", "pulse_width"):
                if key in st and not st[key] > 0:
                    raise ConfigError(f"stage {i}: {key} must be positive")

    def to_dict(self) -> dict:
        data = asdict(self)
        return {k: v for k, v in data.items() if v is not None}

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_toml(cls, text: str) -> "ScenarioConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        return cls.from_dict(data)

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def build_model(self) -> models.QuantumModel:
        spec = self.model
        if self.literal_spectrum:
            spec = replace(spec, eigenvalue_scale=1.0, coupling_scale=1.0)
        return spec.build()

    @property
    def budget_or_default(self) -> float:
        if self.budget is not None:
            return float(self.budget)
        if self.model.kind == "oscillator":
            return math.pi / 2 * (1 + math.sqrt(2) / 2)
        return 13.0 / 3.0


def load_config(source: str | Path) -> ScenarioConfig:
    """Load a scenario from a path, or by name from the bundled scenarios."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    elif str(source) in BUNDLED:
        text = resources.files("galerkin_gates.scenarios").joinpath(f"{source}.toml").read_text()
    else:
        raise ConfigError(f"no such config file or bundled scenario: {source}")
    return ScenarioConfig.from_toml(text)


def _stage_control(st: dict, model: models.QuantumModel, t_start: float, resonant_periods: bool):
    kind = st["type"]
    try:
        if kind == "pulse_train":
            period = float(st["period"])
            if resonant_periods:
                if "transition" not in st:
                    raise ConfigError("resonant_periods needs a 'transition' on every pulse train")
                j, k = st["transition"]
                period = controls.synthesize_resonant_transfer(model, j, k, 1.0).period
            return controls.pulse_train(
                period, float(st["pulse_width"]), float(st.get("amplitude", 1.0)), int(st["n_periods"])
            )
        if kind == "sinusoid":
            spec = controls.SinusoidSpec(
                float(st["amplitude"]), float(st["frequency"]), float(st.get("phase", 0.0)),
                float(st["duration"]),
            )
        else:
            j, k = st["transition"]
            spec = controls.synthesize_resonant_transfer(
                model, j, k, float(st["amplitude"]), float(st.get("phase", 0.0))
            )
        if st.get("clock", "global") == "global":
            # u(t) refers to the scenario clock, not the stage start
            spec = replace(spec, phase=spec.phase + spec.angular_frequency * t_start)
        elif st["clock"] != "local":
            raise ConfigError(f"clock must be 'global' or 'local', got {st['clock']!r}")
        return spec.discretize(float(st.get("step", 5e-3)))
    except KeyError as exc:
        raise ConfigError(f"{kind} stage is missing key {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {kind} stage: {exc}") from exc


def build_control(config: ScenarioConfig, model: models.QuantumModel | None = None):
    """Concatenate the configured stages into one piecewise-constant control."""
    model = model or config.build_model()
    parts, t = [], 0.0
    for st in config.stages:
        c = _stage_control(st, model, t, config.resonant_periods)
        parts.append(c)
        t += c.total_duration
    return controls.concat(*parts)
