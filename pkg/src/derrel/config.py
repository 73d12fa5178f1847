"""Run configuration: JSON file with five blocks, every key optional.

Unknown keys are rejected so that typos do not silently fall back to
defaults. See ``docs/config.md`` for the reference table.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .adoption import X_RANGE, Y_RANGE
from .mcengine import MCConfig
from .residential import ResidenceSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    n_loadpoints: int = 22
    total_customers: int = 4700
    sample_customers: int = 200
    lambda_lp: float = 0.30
    u_lp: float = 3.47
    horizon_years: int = 10
    timestep_hours: float = 1.0
    peak_load_kw: float = 4.0
    commercial_customers: int = 0
    shared_outages: bool = False

    def __post_init__(self):
        if self.n_loadpoints < 1:
            raise ConfigError("system.n_loadpoints must be at least 1")
        if self.total_customers < self.n_loadpoints:
            raise ConfigError("system.total_customers must cover every load point")
        if self.sample_customers < 1:
            raise ConfigError("system.sample_customers must be at least 1")
        if not (self.lambda_lp > 0 and self.u_lp > 0):
            raise ConfigError("system.lambda_lp and system.u_lp must be positive")
        if self.horizon_years < 1:
            raise ConfigError("system.horizon_years must be at least 1")
        if not self.timestep_hours > 0:
            raise ConfigError("system.timestep_hours must be positive")
        if not self.peak_load_kw > 0:
            raise ConfigError("system.peak_load_kw must be positive")
        if self.commercial_customers < 0:
            raise ConfigError("system.commercial_customers must be non-negative")


@dataclass(frozen=True)
class ResidentialConfig:
    derating: float = 0.8
    eta_c: float = 0.95
    eta_d: float = 0.95
    soc_min: float = 0.0
    soc_max: float = 1.0
    soc_init: float = 0.5
    ch_max_kw: Optional[float] = None
    d_max_kw: Optional[float] = None
    pv_lambda: float = 0.1
    pv_mttr_hours: float = 168.0
    es_lambda: float = 0.05
    es_mttr_hours: float = 168.0

    def __post_init__(self):
        self.template()

    def template(self, peak_load_kw: float = 4.0) -> ResidenceSpec:
        try:
            return ResidenceSpec(
                peak_load_kw=peak_load_kw,
                derating=self.derating,
                eta_c=self.eta_c,
                eta_d=self.eta_d,
                soc_min=self.soc_min,
                soc_max=self.soc_max,
                soc_init=self.soc_init,
                ch_max_kw=self.ch_max_kw,
                d_max_kw=self.d_max_kw,
                pv_comp=(self.pv_lambda, self.pv_mttr_hours),
                es_comp=(self.es_lambda, self.es_mttr_hours),
            )
        except ValueError as exc:
            raise ConfigError(f"residential: {exc}") from None


@dataclass(frozen=True)
class AdoptionConfig:
    x_max: float = X_RANGE[1]
    y_max: float = Y_RANGE[1]
    zero_threshold: float = 0.0

    def __post_init__(self):
        if not (self.x_max > 0 and self.y_max > 0):
            raise ConfigError("adoption ranges must be positive")
        if self.zero_threshold < 0:
            raise ConfigError("adoption.zero_threshold must be non-negative")


@dataclass(frozen=True)
class MCBlock:
    alpha: float = 0.05
    batch_size: int = 10
    min_samples: int = 10
    max_samples: int = 2000
    eps_saifi: float = 0.005
    eps_saidi: float = 0.1
    seed: int = 42
    aif_bin_width: float = 0.01

    def __post_init__(self):
        self.to_mc_config()

    def to_mc_config(self) -> MCConfig:
        try:
            return MCConfig(
                alpha=self.alpha,
                batch_size=self.batch_size,
                min_samples=self.min_samples,
                max_samples=self.max_samples,
                eps_saifi=self.eps_saifi,
                eps_saidi=self.eps_saidi,
                master_seed=self.seed,
                aif_bin_width=self.aif_bin_width,
            )
        except ValueError as exc:
            raise ConfigError(f"mc: {exc}") from None


@dataclass(frozen=True)
class IOConfig:
    load_csv: Optional[str] = None
    load_column: str = "load"
    ghi_csv: Optional[str] = None
    ghi_column: str = "ghi"
    synth_seed: int = 42
    output_dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    residential: ResidentialConfig = field(default_factory=ResidentialConfig)
    adoption: AdoptionConfig = field(default_factory=AdoptionConfig)
    mc: MCBlock = field(default_factory=MCBlock)
    io: IOConfig = field(default_factory=IOConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a JSON object")
        blocks = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(data) - set(blocks)
        if unknown:
            raise ConfigError(f"unknown configuration block(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        for name, f in blocks.items():
            block_cls = f.default_factory  # type: ignore[misc]
            kwargs[name] = _build_block(name, block_cls, data.get(name, {}))
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "RunConfig":
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def override(self, block: str, **values: Any) -> "RunConfig":
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        current = getattr(self, block)
        try:
            updated = dataclasses.replace(current, **values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{block}: {exc}") from None
        return dataclasses.replace(self, **{block: updated})


_TYPES = {"int": int, "float": (int, float), "bool": bool, "str": str}


def _build_block(name: str, block_cls, values):
    if not isinstance(values, dict):
        raise ConfigError(f"block {name!r} must be a JSON object")
    fields = {f.name: f for f in dataclasses.fields(block_cls)}
    unknown = set(values) - set(fields)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    for key, val in values.items():
        ftype = str(fields[key].type)
        if val is None:
            if "Optional" not in ftype:
                raise ConfigError(f"{name}.{key} may not be null")
            continue
        base = ftype.replace("Optional[", "").rstrip("]")
        expected = _TYPES.get(base)
        if expected is not None:
            if isinstance(val, bool) and base != "bool":
                raise ConfigError(f"{name}.{key} must be {base}, got a boolean")
            if not isinstance(val, expected):
                raise ConfigError(f"{name}.{key} must be {base}, got {type(val).__name__}")
    try:
        return block_cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None
