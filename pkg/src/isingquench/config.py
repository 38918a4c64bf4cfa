"""Experiment configuration: flat INI-style key=value text with typed
sections, plus repeatable dotted-path overrides from the command line.

Sections: [model], [quench], [schedule], [ensemble], [analysis],
[synthetic], [output].  Machine outputs are JSON; this format exists so a
run is fully described by one human-editable file.
"""

import configparser
import io
from dataclasses import dataclass, fields

from .errors import ConfigError


@dataclass
class ExperimentConfig:
    # [model]
    family: str = "classical"
    d: int = 3
    J: float = 1.0
    critical_point: float | None = None  # override; default per (family, d)
    eta: float | None = None
    z: float | None = None
    # [quench]
    L_values: tuple[int, ...] = (10, 12)
    h_values: tuple[float, ...] = (0.1,)
    # [schedule]
    t_max: float = 100.0
    points_per_decade_time: int = 10
    # [ensemble]
    n_realizations: int = 100
    n_equil: int | None = None  # default: dimension-aware Wolff discard
    seed: int | None = None     # required: no nondeterministic default
    threads: int = 1
    # [analysis]
    window_betas: tuple[float, ...] = tuple(round(0.10 + 0.05 * i, 2) for i in range(9))
    window_gammas: tuple[float, ...] = tuple(round(0.60 + 0.10 * i, 2) for i in range(5))
    bend_fraction: float = 0.25
    bend_delta: float = 0.05
    w_min: float = 0.2
    w_max: float = 3.0
    n_scan: int = 200
    refine_tol: float = 1e-3
    grid_points_per_decade: int = 100
    min_curves: int = 2
    k_sigma: float = 4.0
    # [synthetic]
    w_star: float = 1.0
    scaling_function: str = "rational"
    noise: float = 0.0
    points_per_curve: int = 200
    x_lo: float = 1e-2
    x_hi: float = 1e2
    # [output]
    out_dir: str = "runs/out"

    def validate(self) -> "ExperimentConfig":
        if self.family not in ("classical", "quantum"):
            raise ConfigError(f"[model] family: must be classical or quantum, got {self.family!r}")
        if self.seed is None:
            raise ConfigError("[ensemble] seed: required (runs must be reproducible)")
        if not self.L_values or not self.h_values:
            raise ConfigError("[quench] L_values and h_values must be nonempty")
        if any(h < 0 for h in self.h_values):
            raise ConfigError("[quench] h_values: fields must be nonnegative")
        if self.n_realizations < 1:
            raise ConfigError("[ensemble] n_realizations: must be >= 1")
        if self.t_max <= 0:
            raise ConfigError("[schedule] t_max: must be positive")
        return self


# option name -> (section, type tag); tags: str, int, float, int_list, float_list.
# Options tagged optional accept "none"/"default" as None.
_SCHEMA: dict[str, tuple[str, str]] = {
    "family": ("model", "str"), "d": ("model", "int"), "J": ("model", "float"),
    "critical_point": ("model", "float"), "eta": ("model", "float"), "z": ("model", "float"),
    "L_values": ("quench", "int_list"), "h_values": ("quench", "float_list"),
    "t_max": ("schedule", "float"), "points_per_decade_time": ("schedule", "int"),
    "n_realizations": ("ensemble", "int"), "n_equil": ("ensemble", "int"),
    "seed": ("ensemble", "int"), "threads": ("ensemble", "int"),
    "window_betas": ("analysis", "float_list"), "window_gammas": ("analysis", "float_list"),
    "bend_fraction": ("analysis", "float"), "bend_delta": ("analysis", "float"),
    "w_min": ("analysis", "float"), "w_max": ("analysis", "float"),
    "n_scan": ("analysis", "int"), "refine_tol": ("analysis", "float"),
    "grid_points_per_decade": ("analysis", "int"), "min_curves": ("analysis", "int"),
    "k_sigma": ("analysis", "float"),
    "w_star": ("synthetic", "float"), "scaling_function": ("synthetic", "str"),
    "noise": ("synthetic", "float"), "points_per_curve": ("synthetic", "int"),
    "x_lo": ("synthetic", "float"), "x_hi": ("synthetic", "float"),
    "out_dir": ("output", "str"),
}
_SECTIONS = ("model", "quench", "schedule", "ensemble", "analysis", "synthetic", "output")
_OPTIONAL = {"critical_point", "eta", "z", "n_equil", "seed"}


def _parse_value(name: str, text: str):
    section, tag = _SCHEMA[name]
    text = text.strip()
    if name in _OPTIONAL and text.lower() in ("", "none", "default"):
        return None
    try:
        if tag == "int":
            return int(text)
        if tag == "float":
            return float(text)
        if tag == "int_list":
            return tuple(int(v) for v in text.replace(",", " ").split())
        if tag == "float_list":
            return tuple(float(v) for v in text.replace(",", " ").split())
        return text
    except ValueError as exc:
        raise ConfigError(f"[{section}] {name}: {exc}") from None


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, overrides: list[str] | None = None) -> ExperimentConfig:
    """Parse configuration text, then apply section.key=value overrides."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"[{section}]: unknown section")
        for option in parser.options(section):
            spec = _SCHEMA.get(option)
            if spec is None or spec[0] != section:
                raise ConfigError(f"[{section}] {option}: unknown option")
            values[option] = _parse_value(option, parser.get(section, option))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, _, raw = item.partition("=")
        section, _, name = path.rpartition(".")
        name = name.strip()
        if name not in _SCHEMA:
            raise ConfigError(f"override {path.strip()!r}: unknown option")
        if section and section.strip() != _SCHEMA[name][0]:
            raise ConfigError(
                f"override {path.strip()!r}: option {name!r} lives in section [{_SCHEMA[name][0]}]"
            )
        values[name] = _parse_value(name, raw)
    return ExperimentConfig(**values).validate()


def load_config(path, overrides: list[str] | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file: {exc}") from None
    return parse_config(text, overrides)


def serialize_config(config: ExperimentConfig) -> str:
    """Render a config as INI text; parse(serialize(c)) == c."""
    parser = configparser.ConfigParser()
    for section in _SECTIONS:
        parser.add_section(section)
    for f in fields(ExperimentConfig):
        parser.set(_SCHEMA[f.name][0], f.name, _format_value(getattr(config, f.name)))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_as_dict(config: ExperimentConfig) -> dict:
    """Nested {section: {option: value}} echo for manifests (JSON-safe)."""
    out: dict[str, dict] = {s: {} for s in _SECTIONS}
    for f in fields(ExperimentConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[_SCHEMA[f.name][0]][f.name] = value
    return out
