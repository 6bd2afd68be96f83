"""Scenario configuration files.

The format is a flat key tree, one ``section.key = value`` per line::

    # comments start with '#'
    kind = loss_curve
    loss.sigma_p = 10
    loss.b = [3, 10, 30]

Values are JSON literals (numbers, ``true``/``false``, quoted strings,
lists); anything else is taken as a bare string.  Every key of the chosen
``kind`` has a default, listed by ``tripodslow dump-defaults <kind>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError

KINDS = (
    "vacuum_diffraction",
    "eit_transit",
    "lambda_store_tripod_retrieve",
    "tripod_store_lambda_retrieve",
    "loss_curve",
)


@dataclass(frozen=True)
class Param:
    default: object
    check: str | None = None
    doc: str = ""


def _medium(**overrides):
    base = {
        "medium.coupling_density": Param(1.0e8, "nonnegative", "g^2 n in (c/lambda)^2"),
        "medium.gamma": Param(1.0, "positive", "excited-state decay rate"),
        "medium.omega01": Param(0.0, None, "one-photon detuning"),
        "medium.omega21": Param(0.0, None, "two-photon detuning of level 2"),
        "medium.omega31": Param(0.0, None, "two-photon detuning of level 3"),
        "medium.length": Param(100.0, "positive", "medium length in wavelengths"),
        "medium.phi1_amplitude": Param(1.0, "positive", "sqrt of ground-state density"),
    }
    for k, v in overrides.items():
        base[f"medium.{k}"] = Param(v, base[f"medium.{k}"].check, base[f"medium.{k}"].doc)
    return base


def _grid(n, length):
    return {
        "grid.nx": Param(n, "grid_count", "samples along x"),
        "grid.ny": Param(n, "grid_count", "samples along y"),
        "grid.lx": Param(length, "positive", "window width in wavelengths"),
        "grid.ly": Param(length, "positive", "window height in wavelengths"),
    }


_COMMON = {"seed": Param(0, "int", "seed for randomised checks")}

SCHEMA: dict[str, dict[str, Param]] = {
    "vacuum_diffraction": {
        **_COMMON,
        **_grid(512, 64.0),
        "beam.waist": Param(4.0, "positive", "1/e amplitude radius w0"),
        "beam.rayleigh_ranges": Param(1.0, "positive", "distance in units of pi w0^2 / lambda"),
        "propagation.n_steps": Param(10, "count", "number of split steps"),
    },
    "eit_transit": {
        **_COMMON,
        **_grid(256, 160.0),
        **_medium(coupling_density=99.0, length=50.0),
        "control.omega": Param(1.0, "positive", "uniform total Rabi frequency"),
        "control.b": Param(1.0, "positive", "helper-beam factor for the vortex-control run"),
        "control.width": Param(40.0, "positive", "control width for the vortex-control run"),
        "probe.sigma_p": Param(10.0, "positive", "probe width"),
        "probe.duration": Param(1000.0, "positive", "1/e amplitude half-duration of the pulse"),
        "propagation.n_steps": Param(20, "count", "thin-cloud z steps across the medium"),
        "propagation.frame": Param("comoving", "frame", "comoving or lab delay bookkeeping"),
        "propagation.boundary": Param("periodic", "boundary", "periodic or absorbing"),
        "propagation.absorber_width": Param(10.0, "positive", "absorbing layer width"),
        "propagation.absorber_strength": Param(0.05, "positive", "absorption per unit z"),
        "transit.nz": Param(4000, "count", "cells along z"),
        "transit.courant": Param(0.8, "courant", "v_g dt / dz"),
    },
    "lambda_store_tripod_retrieve": {
        **_COMMON,
        **_grid(256, 160.0),
        **_medium(),
        "probe.sigma_p": Param(10.0, "positive", "probe width"),
        "probe.amplitude": Param(1.0, "positive", "probe peak amplitude"),
        "protocol.amplitude": Param(1.0, "positive", "control amplitude A"),
        "protocol.a": Param(1.0, "positive", "retrieval-to-storage amplitude ratio"),
        "protocol.b": Param(10.0, "nonnegative", "helper control factor at retrieval"),
        "protocol.sigma_s": Param(20.0, "positive", "storing control width"),
        "protocol.sigma_r": Param(20.0, "positive", "vortex retrieval control width"),
        "protocol.sigma_r3": Param(20.0, "positive", "helper retrieval control width"),
    },
    "tripod_store_lambda_retrieve": {
        **_COMMON,
        **_grid(512, 160.0),
        **_medium(),
        "probe.sigma_p": Param(10.0, "positive", "probe width"),
        "probe.amplitude": Param(1.0, "positive", "probe peak amplitude"),
        "protocol.amplitude": Param(1.0, "positive", "control amplitude A"),
        "protocol.a": Param(1.0, "positive", "retrieval-to-storage amplitude ratio"),
        "protocol.b": Param(10.0, "positive", "helper control factor at storage"),
        "protocol.sigma_s": Param(20.0, "positive", "storing control width"),
        "protocol.sigma_r": Param(20.0, "positive", "retrieval control width"),
    },
    "loss_curve": {
        **_COMMON,
        "loss.sigma_p": Param(10.0, "positive", "probe width"),
        "loss.b": Param([3.0, 10.0, 30.0], "b_list", "helper control factors"),
        "loss.sigma_r": Param(20.0, "positive", "vortex retrieval control width"),
        "loss.sigma_r3": Param(None, "optional_positive", "helper width; defaults to sigma_r"),
        "loss.with_fields": Param(False, "bool", "add the grid-based ratio column"),
        "loss.grid_n": Param(512, "grid_count", "grid samples for the field column"),
    },
}


@dataclass
class ScenarioSpec:
    kind: str
    parameters: dict
    seed: int = 0
    lines: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, key):
        return self.parameters[key]


def _check(key, value, rule, line):
    def fail(msg):
        raise ConfigError(f"{key} = {value!r}: {msg}", line)

    number = isinstance(value, (int, float)) and not isinstance(value, bool)
    if rule is None:
        if not number:
            fail("must be a number")
        return float(value)
    if rule in ("positive", "nonnegative"):
        if not number:
            fail("must be a number")
        if rule == "positive" and not value > 0:
            fail("must be > 0")
        if rule == "nonnegative" and not value >= 0:
            fail("must be >= 0")
        return float(value)
    if rule == "optional_positive":
        if value is None:
            return None
        return _check(key, value, "positive", line)
    if rule in ("int", "count", "grid_count"):
        if not number or int(value) != value:
            fail("must be an integer")
        value = int(value)
        if rule == "count" and value < 1:
            fail("must be >= 1")
        if rule == "grid_count" and (value < 8 or value % 2):
            fail("must be even and >= 8")
        return value
    if rule == "courant":
        if not number or not 0 < value <= 1:
            fail("must lie in (0, 1]")
        return float(value)
    if rule == "bool":
        if not isinstance(value, bool):
            fail("must be true or false")
        return value
    if rule == "frame":
        if value not in ("comoving", "lab"):
            fail("must be 'comoving' or 'lab'")
        return value
    if rule == "boundary":
        if value not in ("periodic", "absorbing"):
            fail("must be 'periodic' or 'absorbing'")
        return value
    if rule == "b_list":
        if number:
            value = [value]
        if not isinstance(value, list) or not value:
            fail("must be a non-empty list of numbers")
        out = []
        for b in value:
            if not isinstance(b, (int, float)) or isinstance(b, bool) or not b >= 0:
                fail("every b must be a number >= 0")
            out.append(float(b))
        return out
    raise AssertionError(rule)


def parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _read_pairs(text: str):
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or any(c.isspace() for c in key):
            raise ConfigError(f"malformed key {key!r}", lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        pairs.append((key, parse_value(value), lineno))
    return pairs


def resolve_key(kind: str, key: str) -> str:
    """Full key for ``key``, accepting an unambiguous final component."""
    schema = SCHEMA[kind]
    if key in schema or key == "kind":
        return key
    matches = [k for k in schema if k.rsplit(".", 1)[-1] == key]
    if len(matches) == 1:
        return matches[0]
    valid = ", ".join(sorted(schema))
    if matches:
        raise ConfigError(f"ambiguous key {key!r} (matches {', '.join(matches)})")
    raise ConfigError(f"unknown key {key!r} for kind {kind}; valid keys: {valid}")


def build_spec(kind: str, raw: dict, lines: dict | None = None) -> ScenarioSpec:
    lines = lines or {}
    schema = SCHEMA[kind]
    params = {}
    for key, p in schema.items():
        if key in raw:
            params[key] = _check(key, raw[key], p.check, lines.get(key))
        else:
            params[key] = p.default
    if kind == "loss_curve" and params["loss.sigma_r3"] is None:
        params["loss.sigma_r3"] = params["loss.sigma_r"]
    return ScenarioSpec(kind, params, params["seed"], lines)


def parse_config(text: str, overrides=()) -> ScenarioSpec:
    """Parse and validate a scenario file; ``overrides`` are ``KEY=VALUE`` strings."""
    pairs = _read_pairs(text)
    kind_entries = [(v, n) for k, v, n in pairs if k == "kind"]
    if not kind_entries:
        raise ConfigError(f"missing required key 'kind'; valid kinds: {', '.join(KINDS)}")
    kind, kind_line = kind_entries[-1]
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}", kind_line)
    raw, lines = {}, {}
    for key, value, lineno in pairs:
        if key == "kind":
            continue
        if key not in SCHEMA[kind]:
            valid = ", ".join(sorted(SCHEMA[kind]))
            raise ConfigError(f"unknown key {key!r} for kind {kind}; valid keys: {valid}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        raw[key], lines[key] = value, lineno
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        key, value = (s.strip() for s in item.split("=", 1))
        full = resolve_key(kind, key)
        if full == "kind":
            raise ConfigError("kind cannot be overridden")
        raw[full] = parse_value(value)
        lines[full] = None
    return build_spec(kind, raw, lines)


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value) if not isinstance(value, str) else value


def print_config(spec: ScenarioSpec, docs: bool = False) -> str:
    """Canonical text for a spec; parsing it back gives an equal spec."""
    out = [f"kind = {spec.kind}"]
    for key, p in SCHEMA[spec.kind].items():
        value = spec.parameters[key]
        line = f"{key} = {_format(value)}"
        if docs and p.doc:
            line += f"  # {p.doc}"
        out.append(line)
    return "\n".join(out) + "\n"


def default_spec(kind: str) -> ScenarioSpec:
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    return build_spec(kind, {})
