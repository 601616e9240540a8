"""Run configuration: defaults, presets, file/flag parsing, and merging.

A run is described by one flat key set, accepted both as CLI flags and as a
JSON config file (the file uses the same keys with underscores).  Flags
override file values; a preset seeds every field and explicit values then
override the preset.  Unknown file keys are rejected.

Bundled presets reproduce the three canonical experiments:

  fig_alpha0   steepening and suspected finite-time blow-up at alpha = 0
  fig_alpha1   decay from moderate single-mode data at alpha = 1
  fig_alpha2   decay from broadband chirp data at alpha = 2
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .initial import InitialSpec, InitialSpecError, parse_initial
from .integrator import IntegratorConfig
from .models import ModelError, ModelParams, MODEL_KINDS
from .spectral import SpectralGrid


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


#: model values whose nonlocality order is implied.
_PINNED = {"alpha0": 0.0, "alpha1": 1.0, "alpha2": 2.0}

_DEFAULTS: dict[str, Any] = {
    "model": None,
    "alpha": None,
    "beta": 2.0,
    "epsilon": 1.0,
    "chi": None,
    "n_modes": 256,
    "t_final": 1.0,
    "rtol": 1e-8,
    "atol": 1e-10,
    "dt_init": 1e-4,
    "dt_min": 1e-10,
    "dt_max": 0.05,
    "initial": None,
    "preset": None,
    "output_every": 0.1,
    "output_dir": "nlburgers-out",
    "dealias": True,
    "seed": 0,
    "tail_stop": None,
    "allow_extended_alpha": False,
}

KNOWN_KEYS = frozenset(_DEFAULTS)

_PRESETS: dict[str, dict[str, Any]] = {
    "fig_alpha0": {
        "model": "alpha0",
        "alpha": 0.0,
        "beta": 2.0,
        "epsilon": 1.0,
        "n_modes": 4096,
        # Steepening flags the run (tail_stop / dt collapse) near t = 0.134
        # at this resolution; t_final only needs to sit past that window.
        "initial": {"kind": "sines", "terms": [[-2.0, 4, 0.0]]},
        "t_final": 0.25,
        "dt_init": 1e-5,
        "dt_min": 1e-7,
        "dt_max": 5e-3,
        "output_every": 0.005,
        "tail_stop": 0.05,
    },
    "fig_alpha1": {
        "model": "alpha1",
        "alpha": 1.0,
        "beta": 2.0,
        "epsilon": 1.0,
        "n_modes": 1024,
        "initial": {"kind": "sines", "terms": [[-4.0, 10, 0.0]]},
        "t_final": 1.0,
        "dt_init": 1e-4,
        "dt_max": 0.02,
        "output_every": 0.01,
    },
    "fig_alpha2": {
        "model": "alpha2",
        "alpha": 2.0,
        "beta": 2.0,
        "epsilon": 1.0,
        "n_modes": 4096,
        "initial": {"kind": "chirp", "amplitude": -6.0, "rate": 4.0},
        "t_final": 3.0,
        "dt_init": 1e-4,
        "dt_max": 0.01,
        "output_every": 0.02,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one simulation run."""

    model: str
    alpha: float
    beta: float
    epsilon: float
    n_nodes: int
    t_final: float
    rtol: float
    atol: float
    dt_init: float
    dt_min: float
    dt_max: float
    initial: InitialSpec
    output_every: float
    output_dir: str
    dealias: bool = True
    seed: int = 0
    chi: float | None = None
    tail_stop: float | None = None
    allow_extended_alpha: bool = False
    preset: str | None = None

    def __post_init__(self) -> None:
        # Fail at parse time with readable messages; params() and
        # integrator_config() would re-raise otherwise.
        try:
            self.params()
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            SpectralGrid(self.n_nodes)
        except ValueError as exc:
            raise ConfigError(f"n_modes: {exc}") from exc
        try:
            self.integrator_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.output_every <= 0.0:
            raise ConfigError(f"output_every must be positive, got {self.output_every}")
        if not isinstance(self.initial, InitialSpec):
            raise ConfigError("initial data is required (flag --initial or a preset)")

    def params(self) -> ModelParams:
        return ModelParams(
            alpha=self.alpha,
            beta=self.beta,
            epsilon=self.epsilon,
            model=self.model,
            chi=self.chi,
            dealias=self.dealias,
            allow_extended_alpha=self.allow_extended_alpha,
        )

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(
            t_final=self.t_final,
            rtol=self.rtol,
            atol=self.atol,
            dt_init=self.dt_init,
            dt_min=self.dt_min,
            dt_max=self.dt_max,
            tail_stop=self.tail_stop,
        )

    def grid(self) -> SpectralGrid:
        return SpectralGrid(self.n_nodes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "chi": self.chi,
            "n_modes": self.n_nodes,
            "t_final": self.t_final,
            "rtol": self.rtol,
            "atol": self.atol,
            "dt_init": self.dt_init,
            "dt_min": self.dt_min,
            "dt_max": self.dt_max,
            "initial": self.initial.to_obj(),
            "preset": self.preset,
            "output_every": self.output_every,
            "output_dir": self.output_dir,
            "dealias": self.dealias,
            "seed": self.seed,
            "tail_stop": self.tail_stop,
            "allow_extended_alpha": self.allow_extended_alpha,
        }


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def preset(name: str) -> RunConfig:
    """Fully populated configuration for one bundled scenario."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return parse_config(flags={"preset": name})


def _coerce(key: str, value: Any) -> Any:
    """Light type normalisation for merged values (JSON and flags agree)."""
    if value is None:
        return None
    floats = {
        "alpha",
        "beta",
        "epsilon",
        "chi",
        "t_final",
        "rtol",
        "atol",
        "dt_init",
        "dt_min",
        "dt_max",
        "output_every",
        "tail_stop",
    }
    if key in floats:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if key in ("n_modes", "seed"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if key in ("dealias", "allow_extended_alpha"):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean, got {value!r}")
        return value
    if key in ("model", "output_dir", "preset"):
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    return value  # initial: handled by parse_initial


def parse_config(
    path: str | Path | None = None, flags: Mapping[str, Any] | None = None
) -> RunConfig:
    """Resolve defaults, optional preset, optional JSON file, and flags.

    Precedence (lowest to highest): defaults, preset, file, flags.  The
    preset may be chosen either in the file or by flag; unknown file keys
    are rejected rather than ignored.
    """
    file_values: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            loaded = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {p} must hold a JSON object")
        unknown = set(loaded) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        file_values = loaded

    flag_values = {k: v for k, v in (flags or {}).items() if v is not None}
    unknown = set(flag_values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown flag key(s): {', '.join(sorted(unknown))}")

    preset_name = flag_values.get("preset", file_values.get("preset"))
    merged = dict(_DEFAULTS)
    if preset_name is not None:
        if preset_name not in _PRESETS:
            raise ConfigError(
                f"unknown preset {preset_name!r}; available: {', '.join(preset_names())}"
            )
        merged.update(_PRESETS[preset_name])
    for source in (file_values, flag_values):
        for key, value in source.items():
            if key == "preset":
                continue
            merged[key] = value
    merged["preset"] = preset_name

    for key in list(merged):
        if key not in ("initial", "preset"):
            merged[key] = _coerce(key, merged[key])

    if merged["model"] is None:
        raise ConfigError("no model selected; pass --model or --preset")
    if merged["model"] not in MODEL_KINDS:
        raise ConfigError(
            f"unknown model {merged['model']!r}; expected one of {', '.join(MODEL_KINDS)}"
        )
    if merged["alpha"] is None:
        pinned = _PINNED.get(merged["model"])
        if pinned is None:
            raise ConfigError(f"model {merged['model']!r} needs an explicit alpha")
        merged["alpha"] = pinned
    if merged["initial"] is None:
        raise ConfigError("initial data is required (flag --initial or a preset)")
    try:
        initial = parse_initial(merged["initial"])
    except InitialSpecError as exc:
        raise ConfigError(f"initial: {exc}") from exc

    return RunConfig(
        model=merged["model"],
        alpha=merged["alpha"],
        beta=merged["beta"],
        epsilon=merged["epsilon"],
        n_nodes=merged["n_modes"],
        t_final=merged["t_final"],
        rtol=merged["rtol"],
        atol=merged["atol"],
        dt_init=merged["dt_init"],
        dt_min=merged["dt_min"],
        dt_max=merged["dt_max"],
        initial=initial,
        output_every=merged["output_every"],
        output_dir=merged["output_dir"],
        dealias=merged["dealias"],
        seed=merged["seed"],
        chi=merged["chi"],
        tail_stop=merged["tail_stop"],
        allow_extended_alpha=merged["allow_extended_alpha"],
        preset=preset_name,
    )
