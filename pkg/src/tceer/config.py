"""Simulation configuration and the ``key = value`` scenario file format.

A scenario file is a list of ``key = value`` lines with ``#`` comments.
Optional ``[flc.input]``, ``[flc.output]``, ``[flc.tcm]`` and ``[flc.edm]``
sections carry fuzzy-controller overrides (``term NAME a b c`` and
``rule T1 T2 -> OUT`` lines). Missing keys take the defaults below;
unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

BEHAVIORS = ("dropper", "modifier")
PLACEMENTS = ("route", "random")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SimConfig:
    # deployment
    n: int = 50
    field_width: float = 200.0
    field_height: float = 200.0
    bs_x: float = 100.0
    bs_y: float = 100.0
    radio_range: float = 50.0
    topology_file: Optional[str] = None
    # energy (first-order radio model)
    e_initial: float = 0.5
    packet_bits: int = 4000
    e_elec: float = 50e-9
    eps_amp: float = 10e-12
    e_idle: float = 2e-5
    # traffic and buffers
    rounds: int = 30000
    sources_per_round: int = 5
    buffer_capacity: int = 50
    service_rate: int = 3
    c_th_min: float = 10.0
    c_th_max: float = 40.0
    epsilon: float = 0.05
    # metric and potential weights
    omega: float = 0.2
    k1: float = 2.0
    k2: float = 3.0
    alpha: float = 0.3
    beta: float = 0.7
    # trust
    w_d: float = 0.7
    w_i: float = 0.3
    t_th: float = 0.5
    trust_interval: int = 5
    # attackers
    malicious_count: int = 10
    malicious_ids: tuple = ()
    malicious_behavior: str = "dropper"
    malicious_placement: str = "route"
    p_drop: float = 0.8
    p_modify: float = 0.8
    seed: int = 7
    flc: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


def validate(c: SimConfig) -> None:
    def need(ok, name, msg):
        if not ok:
            raise ConfigError(name, msg)

    need(c.n >= 1, "n", "must be >= 1")
    need(c.field_width > 0, "field_width", "must be positive")
    need(c.field_height > 0, "field_height", "must be positive")
    need(0 <= c.bs_x <= c.field_width, "bs_x", "base station must lie inside the field")
    need(0 <= c.bs_y <= c.field_height, "bs_y", "base station must lie inside the field")
    need(c.radio_range > 0, "radio_range", "must be positive")
    need(c.e_initial > 0, "e_initial", "must be positive")
    need(c.packet_bits > 0, "packet_bits", "must be positive")
    for name in ("e_elec", "eps_amp", "e_idle"):
        need(getattr(c, name) >= 0, name, "must be non-negative")
    need(c.rounds >= 0, "rounds", "must be non-negative")
    need(c.sources_per_round >= 0, "sources_per_round", "must be non-negative")
    need(c.buffer_capacity >= 1, "buffer_capacity", "must be >= 1")
    need(c.service_rate >= 0, "service_rate", "must be non-negative")
    need(0 <= c.c_th_min < c.c_th_max <= c.buffer_capacity, "c_th_min/c_th_max",
         "need 0 <= c_th_min < c_th_max <= buffer_capacity")
    need(0 < c.epsilon < 1, "epsilon", "must lie in (0, 1)")
    need(0 <= c.omega <= 1, "omega", "must lie in [0, 1]")
    need(c.k1 > 0 and c.k2 > 0, "k1/k2", "must both be positive")
    need(c.alpha >= 0 and c.beta >= 0 and abs(c.alpha + c.beta - 1) <= 1e-9,
         "alpha/beta", f"must be non-negative and sum to 1 (got {c.alpha} + {c.beta})")
    need(c.w_d >= 0 and c.w_i >= 0 and abs(c.w_d + c.w_i - 1) <= 1e-9,
         "w_d/w_i", f"must be non-negative and sum to 1 (got {c.w_d} + {c.w_i})")
    need(0 <= c.t_th <= 1, "t_th", "must lie in [0, 1]")
    need(c.trust_interval >= 1, "trust_interval", "must be >= 1")
    # explicit ids take precedence over the count
    need(bool(c.malicious_ids) or 0 <= c.malicious_count <= c.n, "malicious_count",
         "must lie in [0, n]")
    need(all(0 <= i < c.n for i in c.malicious_ids), "malicious_ids", "ids must lie in [0, n)")
    need(len(set(c.malicious_ids)) == len(c.malicious_ids), "malicious_ids", "duplicate ids")
    need(c.malicious_behavior in BEHAVIORS, "malicious_behavior", f"one of {BEHAVIORS}")
    need(c.malicious_placement in PLACEMENTS, "malicious_placement", f"one of {PLACEMENTS}")
    need(0 <= c.p_drop <= 1, "p_drop", "must lie in [0, 1]")
    need(0 <= c.p_modify <= 1, "p_modify", "must lie in [0, 1]")
    if c.flc:
        from .flc import build_controllers
        try:
            build_controllers(c.flc)
        except ValueError as exc:
            raise ConfigError("flc", str(exc)) from None


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig) if f.name != "flc"}
_HINTS = typing.get_type_hints(SimConfig)


def _coerce(key: str, raw: str):
    hint = _HINTS[key]
    raw = raw.strip()
    try:
        if hint is int:
            return int(raw)
        if hint is float:
            return float(raw)
        if hint is str:
            return raw
        if hint is tuple:
            return tuple(int(x) for x in raw.replace(",", " ").split())
        # Optional[str]
        return None if raw.lower() in ("", "none") else raw
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None


def parse_assignments(pairs: Iterable[str]) -> dict:
    values = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(item, "expected key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(key, "unknown key")
        values[key] = _coerce(key, raw)
    return values


def parse_config_text(text: str, source: str = "<config>") -> tuple[dict, dict]:
    """Split scenario text into (key values, flc section lines)."""
    assignments, flc = [], {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section.startswith("flc."):
                raise ConfigError(section, f"{source}:{lineno}: unknown section")
            flc.setdefault(section, [])
            continue
        if section is None:
            assignments.append(line)
        else:
            flc[section].append(line)
    return parse_assignments(assignments), flc


def load_config(path=None, overrides: Iterable[str] = ()) -> SimConfig:
    values, flc = {}, {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        values, flc = parse_config_text(text, str(path))
    values.update(parse_assignments(overrides))
    return SimConfig(**values, flc=flc)


def format_config(cfg: SimConfig) -> str:
    """Fully resolved scenario text; loading it back yields an equal config."""
    lines = []
    for name in _FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, tuple):
            v = " ".join(str(i) for i in v)
        elif v is None:
            v = "none"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{name} = {v}")
    for section, body in sorted(cfg.flc.items()):
        lines.append(f"[{section}]")
        lines.extend(body)
    return "\n".join(lines) + "\n"
