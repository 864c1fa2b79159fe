"""Scenario configuration (YAML) for the command-line front end.

Every section is a dataclass with ``from_dict`` / ``to_dict``; unknown keys
are rejected and error messages carry the dotted path of the offending field.
Physical quantities are SI.  ``params.reduced: true`` selects the reduced
unit system (lambda = 1 m, chi0 = 1 m^3, I = hbar c) and ignores the other
parameter fields except ``intensity_scale``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .condensate import (
    GaussianMixtureProfile,
    GaussianProfile,
    GridProfile,
    box_grid,
    gaussian_grid,
    thomas_fermi_grid,
)
from .params import PhysicalParams, ValidationError, reduced_params

SCHEMA_VERSION = 1


class ConfigError(ValidationError):
    pass


def _build(cls, data, path: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a mapping")
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None


def _positive(path: str, value, allow_zero: bool = False) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(path, f"must be {'>=' if allow_zero else '>'} 0, got {value!r}")
    return value


@dataclass
class ParamsConfig:
    reduced: bool = False
    wavelength: float = 1.0
    chi0: float = 1.0
    intensity: float = 0.0
    intensity_scale: float = 1.0

    def build(self) -> PhysicalParams:
        try:
            if self.reduced:
                return reduced_params(intensity_scale=self.intensity_scale)
            return PhysicalParams(self.wavelength, self.chi0, self.intensity)
        except ValidationError as exc:
            raise ConfigError(f"params.{exc.field}", str(exc)) from None


@dataclass
class ProfileConfig:
    kind: str = "gaussian"
    widths: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    atom_count: float = 1.0
    grid_file: str | None = None
    grid_n: int = 64
    grid_extent: float = 6.0
    components: list = field(default_factory=list)
    weights: list = field(default_factory=list)

    KINDS = ("gaussian", "gaussian_grid", "grid_file", "thomas_fermi", "box", "mixture")

    def validate(self, base: Path | None = None) -> None:
        if self.kind not in self.KINDS:
            raise ConfigError("profile.kind", f"expected one of {self.KINDS}, got {self.kind!r}")
        if len(self.widths) != 3:
            raise ConfigError("profile.widths", "needs three lengths")
        for i, w in enumerate(self.widths):
            _positive(f"profile.widths[{i}]", w)
        _positive("profile.atom_count", self.atom_count, allow_zero=True)
        if self.kind == "grid_file":
            if not self.grid_file:
                raise ConfigError("profile.grid_file", "required for kind grid_file")
            if not self.resolve(base).exists():
                raise ConfigError("profile.grid_file", f"file not found: {self.grid_file}")
        if self.kind == "mixture" and (not self.components or len(self.components) != len(self.weights)):
            raise ConfigError("profile.components", "mixture needs components and matching weights")

    def resolve(self, base: Path | None) -> Path:
        p = Path(self.grid_file)
        return p if p.is_absolute() or base is None else base / p

    def build(self, params: PhysicalParams, base: Path | None = None):
        self.validate(base)
        widths = tuple(float(w) for w in self.widths)
        n = int(self.grid_n)
        N = float(self.atom_count)
        if self.kind == "gaussian":
            return GaussianProfile(widths, N)
        if self.kind == "gaussian_grid":
            return gaussian_grid(widths, n=n, extent=self.grid_extent, atom_count=N)
        if self.kind == "grid_file":
            return GridProfile.load(self.resolve(base), atom_count=N)
        spacing = tuple(2 * self.grid_extent * w / n for w in widths)
        if self.kind == "thomas_fermi":
            return thomas_fermi_grid(widths, (n, n, n), spacing, N)
        if self.kind == "box":
            return box_grid(widths, (n, n, n), spacing, N)
        comps = []
        for i, c in enumerate(self.components):
            try:
                comps.append(GaussianProfile(tuple(c["widths"]), 1.0, tuple(c.get("center", (0, 0, 0)))))
            except (KeyError, TypeError, ValidationError) as exc:
                raise ConfigError(f"profile.components[{i}]", str(exc)) from None
        return GaussianMixtureProfile(tuple(comps), tuple(self.weights), N)


@dataclass
class ObservationConfig:
    snr_target: float | None = 1.0
    duration: float | None = None
    mode: str = "phase-contrast"
    atom_counts: list = field(default_factory=list)


@dataclass
class GridConfig:
    nx: int = 128
    ny: int = 128
    extent: float = 8.0


@dataclass
class OracleConfig:
    tau0: float | None = None
    epsilon: float | None = None

    def resolve(self, params: PhysicalParams) -> tuple[float, float]:
        tau0 = 1e3 * params.wavelength / params.c if self.tau0 is None else _positive("oracle.tau0", self.tau0)
        eps = 1e-6 * params.wavelength if self.epsilon is None else _positive("oracle.epsilon", self.epsilon)
        return tau0, eps


@dataclass
class EvolutionConfig:
    n_max: int = 16
    t: float = 1.0
    dt: float = 1e-3
    n_records: int = 100
    initial: dict = field(default_factory=lambda: {"kind": "fock", "n": 8})
    rates: dict | None = None
    im_gamma_p: float = 0.0
    im_gamma_l: float = 0.0
    coherences: list = field(default_factory=list)
    n_phi: int | None = None


@dataclass
class ImagingConfig:
    nx: int = 256
    ny: int = 256
    extent: float = 16.0
    modes: list = field(default_factory=lambda: ["dark-ground", "phase-contrast"])
    dc_radius_bins: int = 0
    photons_per_pixel: float | None = None


@dataclass
class ScenarioConfig:
    schema_version: int = SCHEMA_VERSION
    params: ParamsConfig = field(default_factory=ParamsConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    observation: ObservationConfig = field(default_factory=ObservationConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    imaging: ImagingConfig = field(default_factory=ImagingConfig)
    output_dir: str = "out"
    base_dir: str | None = field(default=None, repr=False, compare=False)

    SECTIONS = {
        "params": ParamsConfig,
        "profile": ProfileConfig,
        "observation": ObservationConfig,
        "grid": GridConfig,
        "oracle": OracleConfig,
        "evolution": EvolutionConfig,
        "imaging": ImagingConfig,
    }

    @classmethod
    def from_dict(cls, data: dict | None, base_dir: str | None = None) -> "ScenarioConfig":
        data = dict(data or {})
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {version!r}")
        kwargs = {}
        for name, section_cls in cls.SECTIONS.items():
            kwargs[name] = _build(section_cls, data.pop(name, None), name)
        output_dir = data.pop("output_dir", "out")
        if data:
            raise ConfigError(sorted(data)[0], "unknown key")
        cfg = cls(schema_version=version, output_dir=str(output_dir), base_dir=base_dir, **kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version}
        for name in self.SECTIONS:
            out[name] = asdict(getattr(self, name))
        out["output_dir"] = self.output_dir
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def validate(self) -> None:
        self.params.build()
        self.profile.validate(Path(self.base_dir) if self.base_dir else None)
        for name in ("nx", "ny"):
            n = getattr(self.grid, name)
            if not (isinstance(n, int) and n >= 2):
                raise ConfigError(f"grid.{name}", "must be an integer >= 2")
            m = getattr(self.imaging, name)
            if not (isinstance(m, int) and m > 0 and m & (m - 1) == 0):
                raise ConfigError(f"imaging.{name}", "must be a power of two")
        _positive("grid.extent", self.grid.extent)
        _positive("imaging.extent", self.imaging.extent)
        obs = self.observation
        if obs.snr_target is not None:
            _positive("observation.snr_target", obs.snr_target)
        if obs.duration is not None:
            _positive("observation.duration", obs.duration)
        if obs.snr_target is None and obs.duration is None:
            raise ConfigError("observation", "need snr_target or duration")
        for i, n in enumerate(obs.atom_counts):
            _positive(f"observation.atom_counts[{i}]", n)
        if self.oracle.tau0 is not None:
            _positive("oracle.tau0", self.oracle.tau0)
        if self.oracle.epsilon is not None:
            _positive("oracle.epsilon", self.oracle.epsilon)
        ev = self.evolution
        if not (isinstance(ev.n_max, int) and 0 <= ev.n_max <= 256):
            raise ConfigError("evolution.n_max", "must be an integer in 0..256")
        _positive("evolution.t", ev.t, allow_zero=True)
        _positive("evolution.dt", ev.dt)
        for mode in self.imaging.modes:
            if mode not in ("dark-ground", "phase-contrast"):
                raise ConfigError("imaging.modes", f"unknown mode {mode!r}")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"invalid YAML: {exc}") from None
    return ScenarioConfig.from_dict(data, base_dir=str(path.parent))


def parse_config(text: str, base_dir: str | None = None) -> ScenarioConfig:
    return ScenarioConfig.from_dict(yaml.safe_load(text), base_dir=base_dir)
