"""Run configuration for the command-line tools.

A config is a JSON object. Every key is optional; missing keys take the
defaults below, which are the apparatus values of the original experiment
(810 nm photons, f = 40 cm with a 200 um slit in path 1, f = 50 cm with a
400 um pinhole in path 2, theta1 = 62 deg, A = 401, sigma = 4.79 hbar/mm,
delta = 2.88 hbar/mm). The scan range and step are not experimental values;
they are chosen to cover the visible support of the three curves.

    {
      "source":   {"sigma": 4.79, "phi": 0.0},
      "slm":      {"delta": 2.88, "phase_mask_2": null},
      "model":    {"amplitude_A": 401.0, "visibility": 1.0},
      "lens1":    {"wavelength_nm": 810.0, "focal_length_cm": 40.0},
      "lens2":    {"wavelength_nm": 810.0, "focal_length_cm": 50.0},
      "slit":     {"size_um": 200.0},
      "pinhole":  {"size_um": 400.0},
      "theta1_deg": 62.0,
      "theta2_deg": [90.0, 0.0, 45.0],
      "scan":     {"x_min_mm": -0.6, "x_max_mm": 0.6, "step_mm": 0.03},
      "aperture": "point",            # or "window"
      "average_pinhole": false,
      "noise":    "none",             # or "poisson"
      "seed":     0,
      "tomo":     {"werner_v": 0.938083, "counts_per_setting": 1000000,
                   "settings": "pauli"},
      "output_dir": "out"
    }

``slm.phase_mask_2 = null`` means "compensate the source phase", i.e.
``pi - phi``, which gives the pi relative phase the experiment uses.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .apparatus import ApertureConfig, CoincidenceModelParams, LensGeometry
from .biphoton import SlmConfig, SourceConfig

WERNER_V_DEFAULT = math.sqrt(0.88)

DEFAULTS: dict[str, Any] = {
    "source": {"sigma": 4.79, "phi": 0.0},
    "slm": {"delta": 2.88, "phase_mask_2": None},
    "model": {"amplitude_A": 401.0, "visibility": 1.0},
    "lens1": {"wavelength_nm": 810.0, "focal_length_cm": 40.0},
    "lens2": {"wavelength_nm": 810.0, "focal_length_cm": 50.0},
    "slit": {"size_um": 200.0},
    "pinhole": {"size_um": 400.0},
    "theta1_deg": 62.0,
    "theta2_deg": [90.0, 0.0, 45.0],
    "scan": {"x_min_mm": -0.6, "x_max_mm": 0.6, "step_mm": 0.03},
    "aperture": "point",
    "average_pinhole": False,
    "noise": "none",
    "seed": 0,
    "tomo": {"werner_v": WERNER_V_DEFAULT, "counts_per_setting": 1_000_000, "settings": "pauli"},
    "output_dir": "out",
}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _merge(base: dict, override: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        path = f"{prefix}{k}"
        if k == "version" and not prefix:
            continue  # manifests carry the producing version; not a setting
        if k not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(path, "expected an object")
            out[k] = _merge(base[k], v, prefix=f"{path}.")
        else:
            out[k] = v
    return out


def _num(raw: dict, key: str, *, positive=False, nonneg=False, lo=None, hi=None) -> float:
    parts = key.split(".")
    v: Any = raw
    for part in parts:
        v = v[part]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(key, f"expected a finite number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(key, f"must be > 0, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(key, f"must be >= 0, got {v!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ConfigError(key, f"must lie in [{lo}, {hi}], got {v!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig
    slm: SlmConfig
    amplitude_A: float
    visibility: float
    lens1: LensGeometry
    lens2: LensGeometry
    slit: ApertureConfig
    pinhole: ApertureConfig
    theta1: float
    theta2: tuple[float, ...]
    x_min: float
    x_max: float
    step: float
    aperture: str
    average_pinhole: bool
    noise: str
    seed: int
    werner_v: float
    counts_per_setting: float
    tomo_settings: str
    output_dir: str
    raw: dict

    @property
    def params(self) -> CoincidenceModelParams:
        return CoincidenceModelParams(self.amplitude_A, self.source.sigma, self.slm.delta, self.visibility)

    @property
    def relative_phase(self) -> float:
        return self.source.phi + self.slm.phase_mask_2

    @classmethod
    def from_dict(cls, override: dict | None = None) -> "RunConfig":
        raw = _merge(DEFAULTS, override or {})
        sigma = _num(raw, "source.sigma", positive=True)
        phi = _num(raw, "source.phi")
        delta = _num(raw, "slm.delta")
        mask = raw["slm"]["phase_mask_2"]
        source = SourceConfig(sigma=sigma, phi=phi)
        if mask is None:
            slm = SlmConfig.compensating(source, delta)
        else:
            slm = SlmConfig(delta=delta, phase_mask_2=_num(raw, "slm.phase_mask_2"))
        lenses = []
        for name in ("lens1", "lens2"):
            lenses.append(
                LensGeometry(
                    _num(raw, f"{name}.wavelength_nm", positive=True),
                    _num(raw, f"{name}.focal_length_cm", positive=True),
                )
            )
        slit = ApertureConfig("slit", _num(raw, "slit.size_um", positive=True), lenses[0])
        pinhole = ApertureConfig("pinhole", _num(raw, "pinhole.size_um", positive=True), lenses[1])
        t2 = raw["theta2_deg"]
        if isinstance(t2, (int, float)) and not isinstance(t2, bool):
            t2 = [t2]
        if not isinstance(t2, list) or not t2:
            raise ConfigError("theta2_deg", "expected a non-empty list of angles")
        theta2 = []
        for i, v in enumerate(t2):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"theta2_deg[{i}]", f"expected a finite number, got {v!r}")
            theta2.append(float(v))
        if len(set(theta2)) != len(theta2):
            raise ConfigError("theta2_deg", "angles must be distinct")
        x_min = _num(raw, "scan.x_min_mm")
        x_max = _num(raw, "scan.x_max_mm")
        step = _num(raw, "scan.step_mm", positive=True)
        if x_max < x_min:
            raise ConfigError("scan.x_max_mm", "must be >= scan.x_min_mm")
        if raw["aperture"] not in ("point", "window"):
            raise ConfigError("aperture", f"expected 'point' or 'window', got {raw['aperture']!r}")
        if raw["noise"] not in ("none", "poisson"):
            raise ConfigError("noise", f"expected 'none' or 'poisson', got {raw['noise']!r}")
        if not isinstance(raw["average_pinhole"], bool):
            raise ConfigError("average_pinhole", "expected true or false")
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed", f"expected an integer in [0, 2^64), got {seed!r}")
        if raw["tomo"]["settings"] not in ("pauli", "minimal"):
            raise ConfigError("tomo.settings", "expected 'pauli' or 'minimal'")
        if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
            raise ConfigError("output_dir", "expected a non-empty path string")
        return cls(
            source=source,
            slm=slm,
            amplitude_A=_num(raw, "model.amplitude_A", nonneg=True),
            visibility=_num(raw, "model.visibility", lo=0.0, hi=1.0),
            lens1=lenses[0],
            lens2=lenses[1],
            slit=slit,
            pinhole=pinhole,
            theta1=_num(raw, "theta1_deg"),
            theta2=tuple(theta2),
            x_min=x_min,
            x_max=x_max,
            step=step,
            aperture=raw["aperture"],
            average_pinhole=raw["average_pinhole"],
            noise=raw["noise"],
            seed=seed,
            werner_v=_num(raw, "tomo.werner_v", lo=0.0, hi=1.0),
            counts_per_setting=_num(raw, "tomo.counts_per_setting", positive=True),
            tomo_settings=raw["tomo"]["settings"],
            output_dir=raw["output_dir"],
            raw=raw,
        )

    @classmethod
    def load(cls, path: str | Path | None, **overrides) -> "RunConfig":
        data: dict = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError("<file>", f"{path} is not valid JSON: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("<file>", "top level must be a JSON object")
        for k, v in overrides.items():
            if v is not None:
                data[k] = v
        return cls.from_dict(data)
