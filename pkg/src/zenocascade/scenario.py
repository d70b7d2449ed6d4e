"""Scenario configuration: flat INI sections, one per module's settings.

The format is deliberately non-programmable so runs diff cleanly; every
artifact embeds the scenario name and the sha256 of the config bytes.

    [scenario]
    name = regime1

    [system]
    omega01 = 1.0
    omega12 = 4.0

    [density_y]            ; and [density_z]
    family = flat_window   ; flat_window | ohmic_exp | shifted_lorentzian | tabulated
    v0 = 1.2938e-3         ; family-specific keys, see FAMILY_KEYS
    a = 0.2
    b = 1.8

    [solver]               ; evolve command
    t_max = 750.0
    step = 0.0625

    [grid]                 ; spectra command (optional; defaults to the auto rule)
    y_min = 0.1
    ...

    [oracle]               ; oracle command
    n_y = 200
    ...

    [sweep]                ; sweep command
    lambda1 = 1e-6, 1e-4, 1e-2, 1.0
"""

from __future__ import annotations

import hashlib
from configparser import ConfigParser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .densities import FlatWindow, OhmicExp, ShiftedLorentzian, SpectralDensity, Tabulated
from .errors import ConfigError
from .rates import CascadeSystem
from .spectra import GridSpec

FAMILY_KEYS = {
    "flat_window": ("v0", "a", "b"),
    "ohmic_exp": ("g2", "cutoff"),
    "shifted_lorentzian": ("amplitude", "center", "width"),
    "tabulated": ("table_path",),
}


@dataclass(frozen=True)
class SolverSettings:
    t_max: float
    step: float
    rtol: float = 1e-8
    atol: float = 1e-12


@dataclass(frozen=True)
class OracleSettings:
    n_y: int
    n_z: int
    y_min: float
    y_max: float
    z_min: float
    z_max: float
    t_final: float
    dt: float | None = None
    full_spectrum: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    system: CascadeSystem
    solver: SolverSettings | None = None
    grid: GridSpec | None = None
    oracle: OracleSettings | None = None
    sweep: tuple[float, ...] | None = None
    config_hash: str = ""
    sum_axis: tuple[float, float, float] | None = None  # optional closed-form range

    def provenance(self) -> list[str]:
        return [f"scenario: {self.name}", f"config_sha256: {self.config_hash}"]


def _get(parser: ConfigParser, section: str, key: str, cast=float):
    if not parser.has_section(section):
        raise ConfigError(f"missing section [{section}]")
    if not parser.has_option(section, key):
        raise ConfigError(f"missing key '{key}' in section [{section}]")
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc


def _density(parser: ConfigParser, section: str, base_dir: Path) -> SpectralDensity:
    family = _get(parser, section, "family", str).strip().lower()
    if family not in FAMILY_KEYS:
        raise ConfigError(
            f"unknown density family {family!r} in [{section}]; "
            f"expected one of {sorted(FAMILY_KEYS)}")
    try:
        if family == "flat_window":
            return FlatWindow(_get(parser, section, "v0"),
                              _get(parser, section, "a"),
                              _get(parser, section, "b"))
        if family == "ohmic_exp":
            return OhmicExp(_get(parser, section, "g2"),
                            _get(parser, section, "cutoff"))
        if family == "shifted_lorentzian":
            return ShiftedLorentzian(_get(parser, section, "amplitude"),
                                     _get(parser, section, "center"),
                                     _get(parser, section, "width"))
        path = Path(_get(parser, section, "table_path", str).strip())
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"table_path {path} does not exist")
        return Tabulated.from_csv(path)
    except ValueError as exc:
        raise ConfigError(f"invalid density in [{section}]: {exc}") from exc


def _positive(value: float, what: str) -> float:
    if not np.isfinite(value) or value <= 0.0:
        raise ConfigError(f"{what} must be positive, got {value!r}")
    return value


def parse_scenario(text: str, base_dir: Path | str = ".",
                   config_hash: str | None = None) -> Scenario:
    parser = ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_string(text)
    base_dir = Path(base_dir)

    name = _get(parser, "scenario", "name", str).strip()
    if not name or any(ch in name for ch in "/\\ \t"):
        raise ConfigError(f"scenario name {name!r} is not a valid path component")

    system = CascadeSystem(
        omega01=_get(parser, "system", "omega01"),
        omega12=_get(parser, "system", "omega12"),
        density_y=_density(parser, "density_y", base_dir),
        density_z=_density(parser, "density_z", base_dir),
    )

    solver = None
    if parser.has_section("solver"):
        solver = SolverSettings(
            t_max=_positive(_get(parser, "solver", "t_max"), "solver.t_max"),
            step=_positive(_get(parser, "solver", "step"), "solver.step"),
            rtol=float(parser.get("solver", "rtol", fallback="1e-8")),
            atol=float(parser.get("solver", "atol", fallback="1e-12")),
        )

    grid = None
    if parser.has_section("grid"):
        grid = GridSpec(
            y_min=_get(parser, "grid", "y_min"),
            y_max=_get(parser, "grid", "y_max"),
            y_step=_positive(_get(parser, "grid", "y_step"), "grid.y_step"),
            z_min=_get(parser, "grid", "z_min"),
            z_max=_get(parser, "grid", "z_max"),
            z_step=_positive(_get(parser, "grid", "z_step"), "grid.z_step"),
        )

    oracle = None
    if parser.has_section("oracle"):
        oracle = OracleSettings(
            n_y=_get(parser, "oracle", "n_y", int),
            n_z=_get(parser, "oracle", "n_z", int),
            y_min=_get(parser, "oracle", "y_min"),
            y_max=_get(parser, "oracle", "y_max"),
            z_min=_get(parser, "oracle", "z_min"),
            z_max=_get(parser, "oracle", "z_max"),
            t_final=_positive(_get(parser, "oracle", "t_final"), "oracle.t_final"),
            dt=(float(parser.get("oracle", "dt"))
                if parser.has_option("oracle", "dt") else None),
            full_spectrum=parser.getboolean("oracle", "full_spectrum", fallback=False),
        )

    sweep = None
    if parser.has_section("sweep"):
        raw = _get(parser, "sweep", "lambda1", str)
        try:
            sweep = tuple(float(tok) for tok in raw.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad sweep.lambda1 list: {raw!r}") from exc
        if not sweep or any(v <= 0 for v in sweep):
            raise ConfigError("sweep.lambda1 must be a list of positive rates")

    sum_axis = None
    if parser.has_section("grid") and parser.has_option("grid", "sum_min"):
        sum_axis = (_get(parser, "grid", "sum_min"),
                    _get(parser, "grid", "sum_max"),
                    _positive(_get(parser, "grid", "sum_step"), "grid.sum_step"))

    if config_hash is None:
        config_hash = hashlib.sha256(text.encode()).hexdigest()
    return Scenario(name=name, system=system, solver=solver, grid=grid,
                    oracle=oracle, sweep=sweep, config_hash=config_hash,
                    sum_axis=sum_axis)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_scenario(raw.decode(), base_dir=path.parent,
                          config_hash=hashlib.sha256(raw).hexdigest())
