"""Configuration files, trace CSVs, and report JSON.

Configs are JSON (``"schema": 1``).  Unknown keys are rejected with their
JSON path so typos surface immediately; matrices accept a diagonal shorthand
(flat list), a full matrix (nested lists), or a scalar multiple of identity.
Trace CSVs are written with round-trippable ``repr`` formatting, so parsing a
written file reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .model import AreaKind, AreaParams, TieLine
from .simulation import (DEFAULT_RECORD, DisturbanceSpec, GaussDisturbance,
                         Primitive, RampDisturbance, Scenario, SimTrace,
                         StepDisturbance)

SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Malformed configuration; the message carries the JSON path."""


@dataclass(frozen=True)
class ControllerSpec:
    """Controller selection with optional weight/noise overrides (matrices
    stay in raw list/scalar form until a plant fixes the dimensions)."""
    kind: str = "lqg"
    q: object = None
    r: object = None
    w: object = None
    v: object = None
    estimate_disturbances: bool = True


@dataclass(frozen=True)
class OutputSpec:
    trace_csv: str | None = None
    report_json: str | None = None
    signals: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Config:
    """Parsed configuration file."""
    areas: tuple[AreaParams, ...]
    ties: tuple[TieLine, ...]
    controller: ControllerSpec
    scenario_horizon: float
    scenario_dt: float
    seed: int
    disturbance_entries: tuple[tuple[int, Primitive], ...]
    record: tuple[str, ...]
    outputs: OutputSpec
    base_mva: float
    description: str = ""
    initial_plant_state: tuple[float, ...] | None = None
    measurement_noise: bool = False

    def disturbances(self) -> DisturbanceSpec:
        chans: list[list[Primitive]] = [[] for _ in self.areas]
        for channel, prim in self.disturbance_entries:
            chans[channel].append(prim)
        return DisturbanceSpec(channels=tuple(tuple(c) for c in chans))

    def scenario(self, seed: int | None = None,
                 horizon: float | None = None,
                 dt: float | None = None,
                 n_system_states: int | None = None) -> Scenario:
        initial = None
        if self.initial_plant_state is not None:
            n_plant = 4 * len(self.areas)
            x0 = np.zeros(n_system_states if n_system_states else n_plant)
            x0[:n_plant] = self.initial_plant_state
            initial = x0
        return Scenario(
            horizon=self.scenario_horizon if horizon is None else horizon,
            dt=self.scenario_dt if dt is None else dt,
            disturbances=self.disturbances(),
            initial_state=initial,
            record=self.record,
            seed=self.seed if seed is None else seed,
        )


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise _fail(path, f"expected a list, got {type(value).__name__}")
    return value


def _expect_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise _fail(path, f"expected a finite number, got {value!r}")
    return float(value)


def _expect_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {type(value).__name__}")
    return value


def _expect_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed, path: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise _fail(f"{path}.{unknown[0]}" if path else unknown[0],
                    f"unknown key (allowed here: {', '.join(sorted(allowed))})")


def _parse_area(entry, path: str) -> AreaParams:
    entry = _expect_mapping(entry, path)
    allowed = {"name", "kind", "k_p", "t_p", "t_s", "t_tg", "r", "rating_mw"}
    _reject_unknown(entry, allowed, path)
    for key in allowed:
        if key not in entry:
            raise _fail(f"{path}.{key}", "missing required key")
    kind_raw = _expect_str(entry["kind"], f"{path}.kind")
    try:
        kind = AreaKind(kind_raw)
    except ValueError:
        raise _fail(f"{path}.kind",
                    f"must be one of {[k.value for k in AreaKind]}, "
                    f"got {kind_raw!r}") from None
    return AreaParams(
        name=_expect_str(entry["name"], f"{path}.name"),
        kind=kind,
        k_p=_expect_number(entry["k_p"], f"{path}.k_p"),
        t_p=_expect_number(entry["t_p"], f"{path}.t_p"),
        t_s=_expect_number(entry["t_s"], f"{path}.t_s"),
        t_tg=_expect_number(entry["t_tg"], f"{path}.t_tg"),
        r=_expect_number(entry["r"], f"{path}.r"),
        rating_mw=_expect_number(entry["rating_mw"], f"{path}.rating_mw"),
    )


def _parse_tie(entry, path: str) -> TieLine:
    entry = _expect_mapping(entry, path)
    _reject_unknown(entry, {"from", "to", "t0"}, path)
    for key in ("from", "to", "t0"):
        if key not in entry:
            raise _fail(f"{path}.{key}", "missing required key")
    return TieLine(from_area=_expect_int(entry["from"], f"{path}.from"),
                   to_area=_expect_int(entry["to"], f"{path}.to"),
                   t0=_expect_number(entry["t0"], f"{path}.t0"))


def _parse_primitive(entry, path: str) -> tuple[int, Primitive]:
    entry = _expect_mapping(entry, path)
    _reject_unknown(entry, {"channel", "step", "ramp", "gauss"}, path)
    if "channel" not in entry:
        raise _fail(f"{path}.channel", "missing required key")
    channel = _expect_int(entry["channel"], f"{path}.channel")
    kinds = [k for k in ("step", "ramp", "gauss") if k in entry]
    if len(kinds) != 1:
        raise _fail(path, "exactly one of step/ramp/gauss is required")
    kind = kinds[0]
    body = _expect_mapping(entry[kind], f"{path}.{kind}")
    if kind == "step":
        _reject_unknown(body, {"time", "magnitude"}, f"{path}.step")
        if "magnitude" not in body:
            raise _fail(f"{path}.step.magnitude", "missing required key")
        prim: Primitive = StepDisturbance(
            time=_expect_number(body.get("time", 0.0), f"{path}.step.time"),
            magnitude=_expect_number(body["magnitude"], f"{path}.step.magnitude"))
    elif kind == "ramp":
        _reject_unknown(body, {"start", "end", "magnitude"}, f"{path}.ramp")
        for key in ("start", "end", "magnitude"):
            if key not in body:
                raise _fail(f"{path}.ramp.{key}", "missing required key")
        prim = RampDisturbance(
            start=_expect_number(body["start"], f"{path}.ramp.start"),
            end=_expect_number(body["end"], f"{path}.ramp.end"),
            magnitude=_expect_number(body["magnitude"], f"{path}.ramp.magnitude"))
    else:
        _reject_unknown(body, {"sigma", "bandwidth", "seed"}, f"{path}.gauss")
        for key in ("sigma", "bandwidth"):
            if key not in body:
                raise _fail(f"{path}.gauss.{key}", "missing required key")
        seed = body.get("seed")
        prim = GaussDisturbance(
            sigma=_expect_number(body["sigma"], f"{path}.gauss.sigma"),
            bandwidth=_expect_number(body["bandwidth"], f"{path}.gauss.bandwidth"),
            seed=None if seed is None else _expect_int(seed, f"{path}.gauss.seed"))
    return channel, prim


def _parse_controller(entry, path: str) -> ControllerSpec:
    entry = _expect_mapping(entry, path)
    allowed = {"type", "q", "r", "w", "v", "estimate_disturbances"}
    _reject_unknown(entry, allowed, path)
    kind = _expect_str(entry.get("type", "lqg"), f"{path}.type")
    if kind not in ("droop", "lqg"):
        raise _fail(f"{path}.type", f"must be 'droop' or 'lqg', got {kind!r}")
    est = entry.get("estimate_disturbances", True)
    if not isinstance(est, bool):
        raise _fail(f"{path}.estimate_disturbances", "expected a boolean")
    return ControllerSpec(kind=kind, q=entry.get("q"), r=entry.get("r"),
                          w=entry.get("w"), v=entry.get("v"),
                          estimate_disturbances=est)


def _parse_outputs(entry, path: str) -> OutputSpec:
    entry = _expect_mapping(entry, path)
    _reject_unknown(entry, {"trace_csv", "report_json", "signals"}, path)
    signals = None
    if "signals" in entry:
        raw = _expect_list(entry["signals"], f"{path}.signals")
        signals = tuple(_expect_str(s, f"{path}.signals[{k}]")
                        for k, s in enumerate(raw))
    trace = entry.get("trace_csv")
    report = entry.get("report_json")
    if trace is not None:
        trace = _expect_str(trace, f"{path}.trace_csv")
    if report is not None:
        report = _expect_str(report, f"{path}.report_json")
    return OutputSpec(trace_csv=trace, report_json=report, signals=signals)


def parse_config(data, source: str = "config") -> Config:
    """Validate a decoded JSON document into a Config.

    Raises:
        ConfigError: any structural problem, with the offending JSON path.
    """
    data = _expect_mapping(data, source)
    allowed = {"schema", "description", "base_mva", "areas", "ties",
               "controller", "scenario", "outputs"}
    _reject_unknown(data, allowed, "")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise _fail("schema", f"expected {SCHEMA_VERSION}, got {schema!r}")
    if "areas" not in data:
        raise _fail("areas", "missing required key")
    areas = tuple(_parse_area(a, f"areas[{i}]")
                  for i, a in enumerate(_expect_list(data["areas"], "areas")))
    ties = tuple(_parse_tie(t, f"ties[{i}]")
                 for i, t in enumerate(_expect_list(data.get("ties", []), "ties")))
    controller = _parse_controller(data.get("controller", {}), "controller")

    scen = _expect_mapping(data.get("scenario", {}), "scenario")
    s_allowed = {"horizon_s", "dt_s", "seed", "disturbances", "record",
                 "initial_state", "measurement_noise"}
    _reject_unknown(scen, s_allowed, "scenario")
    horizon = _expect_number(scen.get("horizon_s", 30.0), "scenario.horizon_s")
    dt = _expect_number(scen.get("dt_s", 0.01), "scenario.dt_s")
    seed = _expect_int(scen.get("seed", 0), "scenario.seed")
    meas_noise = scen.get("measurement_noise", False)
    if not isinstance(meas_noise, bool):
        raise _fail("scenario.measurement_noise", "expected a boolean")
    initial = None
    if scen.get("initial_state") is not None:
        raw = _expect_list(scen["initial_state"], "scenario.initial_state")
        if len(raw) != 4 * len(areas):
            raise _fail("scenario.initial_state",
                        f"expected {4 * len(areas)} plant-state entries, "
                        f"got {len(raw)}")
        initial = tuple(_expect_number(x, f"scenario.initial_state[{k}]")
                        for k, x in enumerate(raw))
    entries = tuple(
        _parse_primitive(e, f"scenario.disturbances[{i}]")
        for i, e in enumerate(_expect_list(scen.get("disturbances", []),
                                           "scenario.disturbances")))
    for i, (channel, _) in enumerate(entries):
        if not (0 <= channel < len(areas)):
            raise _fail(f"scenario.disturbances[{i}].channel",
                        f"channel {channel} out of range 0..{len(areas) - 1}")
    record_raw = scen.get("record")
    if record_raw is None:
        record: tuple[str, ...] = DEFAULT_RECORD
    else:
        record = tuple(_expect_str(r, f"scenario.record[{k}]")
                       for k, r in enumerate(_expect_list(record_raw,
                                                          "scenario.record")))
    outputs = _parse_outputs(data.get("outputs", {}), "outputs")
    description = _expect_str(data.get("description", ""), "description")
    base_mva = _expect_number(data.get("base_mva", 1000.0), "base_mva")
    return Config(areas=areas, ties=ties, controller=controller,
                  scenario_horizon=horizon, scenario_dt=dt, seed=seed,
                  disturbance_entries=entries, record=record, outputs=outputs,
                  base_mva=base_mva, description=description,
                  initial_plant_state=initial, measurement_noise=meas_noise)


def config_to_dict(config: Config) -> dict:
    """Serialize a Config back into its JSON document form (lossless)."""
    def prim_entry(channel: int, prim: Primitive) -> dict:
        if isinstance(prim, StepDisturbance):
            body = {"step": {"time": prim.time, "magnitude": prim.magnitude}}
        elif isinstance(prim, RampDisturbance):
            body = {"ramp": {"start": prim.start, "end": prim.end,
                             "magnitude": prim.magnitude}}
        else:
            body = {"gauss": {"sigma": prim.sigma, "bandwidth": prim.bandwidth,
                              "seed": prim.seed}}
        return {"channel": channel, **body}

    ctrl: dict = {"type": config.controller.kind}
    for key in ("q", "r", "w", "v"):
        value = getattr(config.controller, key)
        if value is not None:
            ctrl[key] = value
    if not config.controller.estimate_disturbances:
        ctrl["estimate_disturbances"] = False

    scenario: dict = {
        "horizon_s": config.scenario_horizon,
        "dt_s": config.scenario_dt,
        "seed": config.seed,
        "disturbances": [prim_entry(c, p) for c, p in config.disturbance_entries],
        "record": list(config.record),
    }
    if config.initial_plant_state is not None:
        scenario["initial_state"] = list(config.initial_plant_state)
    if config.measurement_noise:
        scenario["measurement_noise"] = True

    outputs: dict = {}
    if config.outputs.trace_csv is not None:
        outputs["trace_csv"] = config.outputs.trace_csv
    if config.outputs.report_json is not None:
        outputs["report_json"] = config.outputs.report_json
    if config.outputs.signals is not None:
        outputs["signals"] = list(config.outputs.signals)

    return {
        "schema": SCHEMA_VERSION,
        "description": config.description,
        "base_mva": config.base_mva,
        "areas": [{"name": a.name, "kind": a.kind.value, "k_p": a.k_p,
                   "t_p": a.t_p, "t_s": a.t_s, "t_tg": a.t_tg, "r": a.r,
                   "rating_mw": a.rating_mw} for a in config.areas],
        "ties": [{"from": t.from_area, "to": t.to_area, "t0": t.t0}
                 for t in config.ties],
        "controller": ctrl,
        "scenario": scenario,
        "outputs": outputs,
    }


def load_config(path) -> Config:
    """Read and validate a JSON config file.

    Raises:
        ConfigError: unreadable file, invalid JSON, or schema violations.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(data, str(path))


def resolve_matrix(spec, size: int, default: NDArray, path: str
                   ) -> NDArray[np.float64]:
    """Expand a config matrix override: scalar -> scalar*I, flat list ->
    diagonal, nested list -> full symmetric matrix; None -> default."""
    if spec is None:
        return default
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return float(spec) * np.eye(size)
    if isinstance(spec, list) and spec and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in spec):
        if len(spec) != size:
            raise _fail(path, f"diagonal needs {size} entries, got {len(spec)}")
        return np.diag([float(x) for x in spec])
    if isinstance(spec, list) and spec and all(isinstance(x, list) for x in spec):
        M = np.array(spec, dtype=float)
        if M.shape != (size, size):
            raise _fail(path, f"matrix must be {size}x{size}, got {M.shape}")
        return M
    raise _fail(path, "expected a scalar, a flat diagonal list, or a nested "
                      "list of rows")


# ---------------------------------------------------------------------------
# trace CSV and report JSON


def write_trace_csv(trace: SimTrace, path) -> None:
    """Write ``t`` plus every recorded signal, one row per step, with
    round-trippable decimal formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = trace.signal_names()
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t",) + names)
        cols = [trace.times] + [trace.columns[n] for n in names]
        for row in zip(*cols):
            writer.writerow([repr(float(x)) for x in row])


def read_trace_csv(path) -> SimTrace:
    """Parse a trace CSV back into a SimTrace (metadata is not stored in
    CSV; returned metadata is empty)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "t":
            raise ConfigError(f"{path}: trace CSV must start with a 't' column")
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    columns = {name: data[:, j + 1].copy()
               for j, name in enumerate(header[1:])}
    return SimTrace(times=data[:, 0].copy() if len(rows) else np.empty(0),
                    columns=columns, metadata={})


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, complex):
        return {"re": _json_safe(value.real), "im": _json_safe(value.imag)}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    return value


def write_report_json(report: dict, path) -> None:
    """Serialize a report dict deterministically (sorted keys, no wall-clock
    content; non-finite floats become the strings "inf"/"-inf"/"nan")."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(report), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")
