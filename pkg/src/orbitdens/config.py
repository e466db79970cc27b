"""Run configuration: strict JSON schema, presets, and field-path error reporting."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .potentials import KINDS, PotentialSpec, make_potential

ARTIFACTS = ("spectrum", "densities", "oscillations", "relations", "fig1", "actions")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PotentialConfig(_Strict):
    kind: Literal[KINDS]  # type: ignore[valid-type]
    params: dict[str, Union[float, list[float]]] = Field(default_factory=dict)
    D: int = Field(1, ge=1, le=3)


class SemiclassicalConfig(_Strict):
    k_max: int = Field(200, ge=1)
    turning_zone: float = Field(0.95, gt=0, lt=1)  # fraction of centre-to-turning-point distance kept
    central_window: float = Field(0.2, gt=0, lt=1)  # same, for the central-formula comparison
    metric_window: float = Field(0.8, gt=0, lt=1)  # same, for QM vs semiclassical metrics
    v_window: float = Field(0.1, gt=0, lt=1)  # central formulas need V < v_window·λ̃


class GridConfig(_Strict):
    spacing: Optional[float] = Field(None, gt=0)


class RunConfig(_Strict):
    potential: PotentialConfig
    N: int = Field(ge=1)
    hbar: float = Field(1.0, gt=0)
    m: float = Field(1.0, gt=0)
    semiclassical: SemiclassicalConfig = Field(default_factory=SemiclassicalConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    out: Optional[str] = None
    artifacts: list[Literal[ARTIFACTS]] = Field(default_factory=lambda: list(ARTIFACTS))  # type: ignore[valid-type]
    checks: dict[str, float] = Field(default_factory=dict)

    def build_potential(self) -> PotentialSpec:
        try:
            return make_potential(self.potential.kind, self.potential.D, **self.potential.params)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc), "potential.params") from exc


def _path(loc) -> str:
    return ".".join(str(p) for p in loc)


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded configuration; errors carry the dotted path of the first bad field."""
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(err["msg"], _path(err["loc"]) or "<root>") from None
    cfg.build_potential()
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", str(path)) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "<root>")
    return parse_config(data)


DEFAULT_CHECKS_1D = {
    "rel_rms_drho": 0.1,
    "virial_rms": 0.1,
    "tautau_rms": 0.1,
    "central_amplitude_dev": 0.05,
    "wavelength_dev": 0.02,
}
DEFAULT_CHECKS_RADIAL = {
    "sign_mismatch_r0": 0.0,
    "zero1_dev": 0.05,
    "zero2_dev": 0.05,
    "laplace_qm": 0.15,
    "laplace_bessel": 1e-6,
}

PRESETS: dict[str, dict] = {
    "fig1": {
        "potential": {"kind": "quartic", "params": {"c": 0.25}},
        "N": 40,
        "checks": {"rel_rms_drho": 0.1, "virial_rms": 0.1, "tautau_rms": 0.1, "drho0_dev": 0.1},
    },
    "box": {
        "potential": {"kind": "box", "params": {"L": 1.0}},
        "N": 10,
        "semiclassical": {"k_max": 500, "turning_zone": 0.9, "metric_window": 0.9},
        "checks": {"rms_drho": 1e-3, "max_abs_drho": 1e-3},
    },
    "harmonic": {
        "potential": {"kind": "harmonic", "params": {"omega": 1.0}},
        "N": 40,
        "checks": {"rel_rms_drho": 0.1, "wavelength_dev": 0.02},
    },
    "asym": {
        "potential": {"kind": "two_sided_harmonic", "params": {"omega_minus": 1.0, "omega_plus": 2.0}},
        "N": 40,
        "checks": {"rel_rms_drho": 0.1, "wavelength_dev": 0.02},
    },
    "ho3d": {
        "potential": {"kind": "harmonic", "params": {"omega": 1.0}, "D": 3},
        "N": 120,
        "artifacts": ["spectrum", "densities", "relations", "fig1"],
        "checks": dict(DEFAULT_CHECKS_RADIAL),
    },
}

PRESET_DESCRIPTIONS = {
    "fig1": "quartic V = x^4/4, N = 40: density and kinetic-density oscillations",
    "box": "infinite well L = 1, N = 10: semiclassical sum against exact densities",
    "harmonic": "1D oscillator, N = 40",
    "asym": "two-sided oscillator (omega 1 and 2), N = 40: asymmetry phase",
    "ho3d": "3D oscillator, N = 120 (8 filled shells): radial Bessel law",
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
    return parse_config(PRESETS[name])
