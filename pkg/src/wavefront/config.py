"""Flat-keyed scenario configuration.

Config files are plain text, one `key = value` per line, `#` comments;
values are JSON fragments (numbers, strings, booleans, lists).  Keys carry
explicit units in their names; nothing is unit-inferred.  Parsing is strict:
unknown keys and ill-typed values are rejected with the offending key and
line number.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Union

from .geometry import ARCHITECTURES


class ConfigError(ValueError):
    """Invalid configuration (maps to CLI exit code 2)."""


@dataclass
class ScenarioConfig:
    """Full experiment description with desk-scale defaults."""

    # carrier and link budget
    f0_ghz: float = 60.0
    c_m_per_s: float = 3.0e8
    eirp_dbm: float = 23.0
    noise_dbw: float = -106.0

    # receiver geometry
    apertures_m: List[List[float]] = field(
        default_factory=lambda: [[0.025, 0.10], [0.025, 0.15], [0.025, 0.20]]
    )
    architectures: List[str] = field(default_factory=lambda: list(ARCHITECTURES))
    focal_length_m: Optional[float] = None  # None: focal length = D_z
    quadrature_step_fraction: float = 0.125

    # estimation
    estimator_mode: str = "analytic"      # analytic | exhaustive offset handling
    n_offsets: int = 64
    rlens_noise_mode: str = "per-config"  # per-config | shared
    include_differential: bool = True

    # global search grid (dump/score exports)
    grid_d_min_m: float = 1.0
    grid_d_max_m: float = 50.0
    grid_d_step_m: float = 0.25
    grid_theta_min_deg: float = -60.0
    grid_theta_max_deg: float = 60.0
    grid_theta_step_deg: float = 0.5

    # range sweep
    sweep_distances_m: List[float] = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    sweep_theta_deg: float = 0.0
    n_mc: int = 100

    # local search windows per estimator (auto: range dependent)
    ml_window_d_m: Optional[float] = None
    ml_step_d_m: Optional[float] = None
    ml_window_theta_deg: float = 1.0
    ml_step_theta_deg: float = 0.05
    rlens_window_d_m: Optional[float] = None
    rlens_step_d_m: float = 0.25
    rlens_window_theta_deg: float = 2.0
    rlens_step_theta_deg: float = 0.5
    diff_window_d_m: Optional[float] = None
    diff_step_d_m: float = 0.25
    diff_window_theta_deg: float = 5.0
    diff_step_theta_deg: float = 0.25

    # rmse map
    rmse_map_size_m: float = 20.0
    rmse_map_cell_m: float = 2.0
    map_n_mc: int = 25
    map_window_d_m: float = 3.0
    map_step_d_m: float = 0.1
    map_window_theta_deg: float = 2.0
    map_step_theta_deg: float = 0.5

    # interference
    room_size_m: float = 40.0
    room_cell_m: float = 1.0
    rx_x_m: float = 0.0
    rx_y_m: float = 0.0
    rx_bearing_deg: float = 45.0
    useful_position_m: List[float] = field(default_factory=lambda: [15.0, 15.0])
    xi_star_db: float = 10.0
    sir_sweep_d_m: float = 20.0
    sir_dd_min_m: float = -19.0
    sir_dd_max_m: float = 20.0
    sir_dd_step_m: float = 0.5
    sir_worst_case: bool = True

    # Poisson interferer field
    ppp_intensity: float = 5.0
    ppp_per_area: bool = False
    ppp_n_mc: int = 30
    ppp_cell_m: float = 2.0
    ppp_square_aperture_norms: List[float] = field(default_factory=lambda: [10000.0])

    # far-field boundary table
    fraunhofer_f0_ghz: List[float] = field(default_factory=lambda: [float(f) for f in range(1, 101)])
    fraunhofer_diameters_m: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])

    # bookkeeping
    seed: int = 1
    out_dir: str = "out"

    # ------------------------------------------------------------------
    def validate(self) -> "ScenarioConfig":
        def bad(name, why):
            raise ConfigError(f"config field {name!r}: {why}")

        if self.f0_ghz <= 0:
            bad("f0_ghz", "must be positive")
        if self.c_m_per_s <= 0:
            bad("c_m_per_s", "must be positive")
        if not self.apertures_m:
            bad("apertures_m", "at least one aperture required")
        for ap in self.apertures_m:
            if len(ap) != 2 or ap[0] <= 0 or ap[1] <= 0:
                bad("apertures_m", f"each entry must be [d_y, d_z] positive, got {ap}")
        for arch in self.architectures:
            if arch not in ARCHITECTURES:
                bad("architectures", f"unknown architecture {arch!r}")
        if not 0 < self.quadrature_step_fraction <= 0.5:
            bad("quadrature_step_fraction", "must be in (0, 0.5]")
        if self.estimator_mode not in ("analytic", "exhaustive"):
            bad("estimator_mode", "must be 'analytic' or 'exhaustive'")
        if self.rlens_noise_mode not in ("per-config", "shared"):
            bad("rlens_noise_mode", "must be 'per-config' or 'shared'")
        if self.n_mc < 1 or self.map_n_mc < 1 or self.ppp_n_mc < 1:
            bad("n_mc", "Monte Carlo counts must be >= 1")
        if any(d <= 0 for d in self.sweep_distances_m):
            bad("sweep_distances_m", "distances must be positive")
        if len(self.useful_position_m) != 2:
            bad("useful_position_m", "must be [x, y]")
        if self.room_size_m <= 0 or self.room_cell_m <= 0:
            bad("room_size_m", "room size and cell must be positive")
        if self.seed < 0:
            bad("seed", "must be non-negative")
        return self

    # ------------------------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "ScenarioConfig":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
            try:
                values[key] = json.loads(val.strip())
            except json.JSONDecodeError:
                values[key] = val.strip()  # bare string value
        cfg = cls()
        for key, val in values.items():
            values[key] = _coerce(key, val, getattr(cfg, key))
        return dataclasses.replace(cfg, **values).validate()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ScenarioConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return cls.parse(path.read_text())

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {json.dumps(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    # ------------------------------------------------------------------
    @property
    def f0_hz(self) -> float:
        return self.f0_ghz * 1e9

    @property
    def wavelength_m(self) -> float:
        return self.c_m_per_s / self.f0_hz


def _coerce(key: str, val, default):
    """Light type check against the default value's shape."""
    if default is None or isinstance(default, bool):
        if default is None:
            if isinstance(val, (int, float)) or val is None:
                return None if val is None else float(val)
            raise ConfigError(f"config field {key!r}: expected a number or null, got {val!r}")
        if not isinstance(val, bool):
            raise ConfigError(f"config field {key!r}: expected true/false, got {val!r}")
        return val
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
            raise ConfigError(f"config field {key!r}: expected an integer, got {val!r}")
        return int(val)
    if isinstance(default, float):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"config field {key!r}: expected a number, got {val!r}")
        return float(val)
    if isinstance(default, str):
        if not isinstance(val, str):
            raise ConfigError(f"config field {key!r}: expected a string, got {val!r}")
        return val
    if isinstance(default, list):
        if not isinstance(val, list):
            raise ConfigError(f"config field {key!r}: expected a list, got {val!r}")
        return val
    raise ConfigError(f"config field {key!r}: unsupported value {val!r}")
