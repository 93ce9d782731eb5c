"""Run configuration: dataclasses, TOML loading and dotted-key overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .kinematics import GeneratorConfig
from .polarimeter import AnalyzerConfig
from .spin_models import SourceModelSpec
from .timing import TimingConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisOptions:
    # "fixed" uses analyzer.analyzing_power, "self_calibrated" measures it from the data
    a_source: str = "self_calibrated"
    subtract_randoms: bool = False
    relative_ke_cut_mev: float = 1.0
    energy_bin_mev: float = 1.0
    bell_cases: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    wigner_cases: tuple = (1, 2, 3, 4, 5, 6)

    def __post_init__(self):
        object.__setattr__(self, "bell_cases", tuple(int(c) for c in self.bell_cases))
        object.__setattr__(self, "wigner_cases", tuple(int(c) for c in self.wigner_cases))
        if self.a_source not in ("fixed", "self_calibrated"):
            raise ValueError(f"a_source must be 'fixed' or 'self_calibrated', got {self.a_source!r}")
        if not all(1 <= c <= 8 for c in self.bell_cases):
            raise ValueError("Bell case ids run from 1 to 8")
        if not all(1 <= c <= 6 for c in self.wigner_cases):
            raise ValueError("Wigner case ids run from 1 to 6")
        if self.energy_bin_mev <= 0:
            raise ValueError("energy_bin_mev must be positive")


@dataclass(frozen=True)
class RunConfig:
    seed: int
    n_events: int = 100_000
    write_truth: bool = True
    source: SourceModelSpec = field(default_factory=SourceModelSpec)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)

    def __post_init__(self):
        if self.seed is None or isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if int(self.n_events) != self.n_events or self.n_events < 0:
            raise ConfigError("n_events must be a non-negative integer")

    def to_dict(self):
        def conv(v):
            if dataclasses.is_dataclass(v):
                return {f.name: conv(getattr(v, f.name)) for f in dataclasses.fields(v)}
            if isinstance(v, tuple):
                return [conv(x) for x in v]
            if hasattr(v, "value"):
                return v.value
            return v
        return conv(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "source": SourceModelSpec,
    "generator": GeneratorConfig,
    "analyzer": AnalyzerConfig,
    "timing": TimingConfig,
    "analysis": AnalysisOptions,
}


def _build(cls, values: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}]: {exc}") from exc


def from_dict(data: dict) -> RunConfig:
    data = dict(data)
    if data.get("seed") is None:
        raise ConfigError("a seed is required; there is no default")
    kw = {}
    for name, cls in _SECTIONS.items():
        section = data.pop(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be a table")
        kw[name] = _build(cls, section, name)
    top = {"seed", "n_events", "write_truth"}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    try:
        return RunConfig(**data, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``section.key=value`` strings; values use TOML syntax, bare words are strings."""
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        if len(parts) == 1:
            data[parts[0]] = _parse_value(text.strip())
        elif len(parts) == 2:
            data.setdefault(parts[0], {})[parts[1]] = _parse_value(text.strip())
        else:
            raise ConfigError(f"override key too deep: {key!r}")
    return data


def load_config(path=None, overrides=None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            data = tomllib.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return from_dict(apply_overrides(data, overrides))
