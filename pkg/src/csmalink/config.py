"""Flat key-value experiment configs.

Format: one `key = value` per line, `#` starts a comment, blank lines are
ignored. `schema_version = 1` is required. A key prefixed `run.<name>.`
overrides the base value for that named run, so one file can describe
several related sweeps that share most settings.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .framing import RbGeometry
from .mapping import parse_lookup_table
from .simulate import ExperimentConfig, PlanSpec, ScheduleSpec, StopRule, SweepSpec


class ConfigError(Exception):
    """Config file problem; message carries file and line when known."""


_KNOWN_KEYS = {
    "schema_version",
    "seed",
    "order",
    "groups",
    "snr.mode",
    "snr.start_db",
    "snr.stop_db",
    "snr.step_db",
    "snr.data_bits",
    "plan.kind",
    "plan.address_positions",
    "plan.qos_bits",
    "plan.lookup_file",
    "schedule.kind",
    "schedule.weights",
    "stop.min_symbols",
    "stop.min_errors",
    "stop.symbol_cap",
    "geometry.subcarriers",
    "geometry.symbols_per_slot",
    "geometry.fft_size",
    "geometry.subcarrier_offset",
    "geometry.cp_length",
}


@dataclass(frozen=True)
class LoadedConfig:
    """Parsed config: named runs in file order; single means no run.* keys."""

    path: str
    runs: dict[str, ExperimentConfig]
    single: bool

    def single_run(self) -> ExperimentConfig:
        if not self.single:
            names = ", ".join(sorted(self.runs))
            raise ConfigError(
                f"{self.path}: defines multiple runs ({names}), pick one with --run"
            )
        return next(iter(self.runs.values()))


def _fail(path: str, lineno: int, message: str) -> ConfigError:
    return ConfigError(f"{path}:{lineno}: {message}")


def _parse_lines(path: str, text: str):
    """Yield (lineno, key, value) for every assignment line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _fail(path, lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise _fail(path, lineno, "missing key before '='")
        if not value:
            raise _fail(path, lineno, f"missing value for {key!r}")
        yield lineno, key, value


def _as_int(path: str, lineno: int, key: str, value: str) -> int:
    try:
        return int(value, 0)
    except ValueError:
        raise _fail(path, lineno, f"{key} must be an integer, got {value!r}") from None


def _as_float(path: str, lineno: int, key: str, value: str) -> float:
    if value.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except ValueError:
        raise _fail(path, lineno, f"{key} must be a number, got {value!r}") from None


def _as_int_tuple(path: str, lineno: int, key: str, value: str) -> tuple[int, ...]:
    items = [part.strip() for part in value.split(",")]
    if any(not part for part in items):
        raise _fail(path, lineno, f"{key} has an empty list entry in {value!r}")
    return tuple(_as_int(path, lineno, key, part) for part in items)


def _build_run(path: str, run_name: str, entries: dict[str, tuple[int, str]]):
    """Assemble one ExperimentConfig from merged key -> (lineno, value)."""

    def has(key: str) -> bool:
        return key in entries

    def raw(key: str) -> tuple[int, str]:
        return entries[key]

    def get_int(key: str, default: int | None = None) -> int | None:
        if not has(key):
            return default
        lineno, value = raw(key)
        return _as_int(path, lineno, key, value)

    def get_float(key: str, default: float) -> float:
        if not has(key):
            return default
        lineno, value = raw(key)
        return _as_float(path, lineno, key, value)

    def get_str(key: str, default: str) -> str:
        return raw(key)[1] if has(key) else default

    label = f"run {run_name!r}" if run_name else "config"
    order = get_int("order")
    if order is None:
        raise ConfigError(f"{path}: {label} is missing required key 'order'")
    if not has("plan.kind"):
        raise ConfigError(f"{path}: {label} is missing required key 'plan.kind'")

    kind = get_str("plan.kind", "")
    address_positions = None
    qos_bits = None
    lookup_rows = None
    lookup_order = None
    if has("plan.address_positions"):
        lineno, value = raw("plan.address_positions")
        address_positions = _as_int_tuple(path, lineno, "plan.address_positions", value)
    if has("plan.qos_bits"):
        lineno, value = raw("plan.qos_bits")
        qos_bits = _as_int_tuple(path, lineno, "plan.qos_bits", value)
    if has("plan.lookup_file"):
        lineno, value = raw("plan.lookup_file")
        table_path = os.path.join(os.path.dirname(os.path.abspath(path)), value)
        try:
            with open(table_path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise _fail(path, lineno, f"cannot read lookup table {value!r}: {exc}")
        try:
            lookup_order, rows = parse_lookup_table(text.splitlines(), source=value)
        except ValueError as exc:
            raise _fail(path, lineno, str(exc)) from None
        lookup_rows = tuple(rows)

    schedule_weights = None
    if has("schedule.weights"):
        lineno, value = raw("schedule.weights")
        schedule_weights = _as_int_tuple(path, lineno, "schedule.weights", value)

    try:
        plan = PlanSpec(
            kind=kind,
            address_positions=address_positions,
            qos_bits=qos_bits,
            lookup_rows=lookup_rows,
            lookup_order=lookup_order,
        )
        sweep = SweepSpec(
            mode=get_str("snr.mode", "symbol"),
            start_db=get_float("snr.start_db", 0.0),
            stop_db=get_float("snr.stop_db", 18.0),
            step_db=get_float("snr.step_db", 2.0),
            data_bits=get_int("snr.data_bits"),
        )
        geometry = RbGeometry(
            subcarriers=get_int("geometry.subcarriers", 12),
            symbols_per_slot=get_int("geometry.symbols_per_slot", 14),
            fft_size=get_int("geometry.fft_size", 256),
            subcarrier_offset=get_int("geometry.subcarrier_offset", 16),
            cp_length=get_int("geometry.cp_length", 32),
        )
        schedule = ScheduleSpec(
            kind=get_str("schedule.kind", "round-robin"),
            weights=schedule_weights,
        )
        stop = StopRule(
            min_symbols=get_int("stop.min_symbols", 200_000),
            min_errors=get_int("stop.min_errors", 200),
            symbol_cap=get_int("stop.symbol_cap", 10_000_000),
        )
        config = ExperimentConfig(
            order=order,
            plan=plan,
            sweep=sweep,
            geometry=geometry,
            schedule=schedule,
            stop=stop,
            seed=get_int("seed", 0),
            groups=get_int("groups", 1),
        )
        plan.build(order)  # surface plan/order mismatches at load time
    except ValueError as exc:
        raise ConfigError(f"{path}: {label}: {exc}") from None
    return config


def load_config(path: str) -> LoadedConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text, path=path)


def parse_config(text: str, path: str = "<config>") -> LoadedConfig:
    base: dict[str, tuple[int, str]] = {}
    run_entries: dict[str, dict[str, tuple[int, str]]] = {}
    for lineno, key, value in _parse_lines(path, text):
        if key.startswith("run."):
            parts = key.split(".", 2)
            if len(parts) < 3 or not parts[1] or not parts[2]:
                raise _fail(path, lineno, f"run key must be run.<name>.<key>: {key!r}")
            name, subkey = parts[1], parts[2]
            if subkey == "schema_version":
                raise _fail(path, lineno, "schema_version cannot be set per run")
            if subkey not in _KNOWN_KEYS:
                raise _fail(path, lineno, f"unknown key {subkey!r}")
            scope = run_entries.setdefault(name, {})
            if subkey in scope:
                raise _fail(path, lineno, f"duplicate key {key!r}")
            scope[subkey] = (lineno, value)
        else:
            if key not in _KNOWN_KEYS:
                raise _fail(path, lineno, f"unknown key {key!r}")
            if key in base:
                raise _fail(path, lineno, f"duplicate key {key!r}")
            base[key] = (lineno, value)

    if "schema_version" not in base:
        raise ConfigError(f"{path}: missing required key 'schema_version'")
    lineno, value = base.pop("schema_version")
    version = _as_int(path, lineno, "schema_version", value)
    if version != 1:
        raise _fail(path, lineno, f"unsupported schema_version {version}, expected 1")

    if run_entries:
        runs = {
            name: _build_run(path, name, {**base, **scoped})
            for name, scoped in run_entries.items()
        }
        return LoadedConfig(path=path, runs=runs, single=False)
    return LoadedConfig(path=path, runs={"": _build_run(path, "", base)}, single=True)
