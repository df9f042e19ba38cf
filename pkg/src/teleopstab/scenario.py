"""Scenario files, run settings, and machine-readable analysis reports.

Scenario files are plain-text sectioned key-value (INI style, ``#``/``;``
comments).  Unknown sections or keys are rejected; values are checked against
the model invariants on load.  The grammar is documented in
docs/scenario-format.md.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import dataclass

from . import __version__
from .control import ControllerGains
from .plants import ImpedanceModel, RobotParams, WallModel
from .sim import NonidealityConfig, OperatorForce, SimScenario, SimVerdict
from .stability import ChannelConfig, StabilityReport

__all__ = [
    "ParseError",
    "ValidationError",
    "RunSettings",
    "load_scenario",
    "load_run_settings",
    "save_scenario",
    "serialize_scenario",
    "scenario_hash",
    "build_report",
    "write_report",
    "read_report",
]

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Scenario file is not well-formed sectioned key-value text."""


class ValidationError(ValueError):
    """Scenario file is well-formed but violates the model contract."""


@dataclass(frozen=True)
class RunSettings:
    """Per-run knobs from [run] that are not part of the scenario physics."""

    seed: int = 0
    grid_points: int = 512
    position_bound: float = 10.0  # rad
    settle_window: float = 5.0  # s
    settle_tol: float = 0.01  # rad/s


_BOOLS = {
    "1": True, "yes": True, "true": True, "on": True,
    "0": False, "no": False, "false": False, "off": False,
}


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(f"{section}.{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ValidationError(f"{section}.{key}: must be finite")
    return v


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(
            f"{section}.{key}: expected an integer, got {raw!r}"
        ) from None


def _parse_bool(section: str, key: str, raw: str) -> bool:
    try:
        return _BOOLS[raw.strip().lower()]
    except KeyError:
        raise ValidationError(
            f"{section}.{key}: expected a boolean, got {raw!r}"
        ) from None


# key -> (parser kind, default); default None with no marker means required
_REQUIRED = object()

_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "master": {"mass": ("float", _REQUIRED), "damping": ("float", _REQUIRED)},
    "slave": {"mass": ("float", _REQUIRED), "damping": ("float", _REQUIRED)},
    "human": {
        "mass": ("float", _REQUIRED),
        "damping": ("float", _REQUIRED),
        "stiffness": ("float", _REQUIRED),
    },
    "wall": {
        "position": ("float", _REQUIRED),
        "stiffness": ("float", 1000.0),
        "damping": ("float", 1.0),
    },
    "gains": {
        "kp": ("float", _REQUIRED),
        "kv": ("float", _REQUIRED),
        "kd": ("float", _REQUIRED),
        "p_eps": ("float", _REQUIRED),
        "nu": ("float", None),
    },
    "channel": {
        "period": ("float", _REQUIRED),
        "d1": ("int", _REQUIRED),
        "d2": ("int", _REQUIRED),
        "eps_min": ("float", _REQUIRED),
        "alpha": ("float", _REQUIRED),
    },
    "operator_force": {
        "start": ("float", _REQUIRED),
        "stop": ("float", _REQUIRED),
        "magnitude": ("float", 1.0),
    },
    "nonidealities": {
        "enabled": ("bool", True),
        "encoder_step": ("float", 2.0 * math.pi / 4096.0),
        "actuator_limit": ("float", 5.0),
        "force_to_volts": ("float", 4.054),
        "velocity_filter_cutoff": ("float", 50.0),
        "noise_std": ("float", 0.0),
    },
    "run": {
        "duration": ("float", _REQUIRED),
        "substeps": ("int", _REQUIRED),
        "seed": ("int", 0),
        "grid_points": ("int", 512),
        "position_bound": ("float", 10.0),
        "settle_window": ("float", 5.0),
        "settle_tol": ("float", 0.01),
        "jitter": ("bool", False),
        "extra_loop_latency": ("float", 0.0),
    },
}

_OPTIONAL_SECTIONS = {"nonidealities"}
_PARSERS = {"float": _parse_float, "int": _parse_int, "bool": _parse_bool}


def _read_sections(text: str, origin: str) -> dict[str, dict[str, object]]:
    cp = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None, strict=True
    )
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None
    if cp.defaults():
        raise ValidationError("keys are not allowed outside a section")
    out: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ValidationError(f"unknown section {section!r}")
        spec = _SCHEMA[section]
        values: dict[str, object] = {}
        for key, raw in cp.items(section):
            if key not in spec:
                raise ValidationError(f"{section}: unknown key {key!r}")
            kind, _ = spec[key]
            values[key] = _PARSERS[kind](section, key, raw)
        out[section] = values
    for section, spec in _SCHEMA.items():
        if section not in out:
            if section in _OPTIONAL_SECTIONS:
                continue
            raise ValidationError(f"{section}: required")
        for key, (_, default) in spec.items():
            if key not in out[section]:
                if default is _REQUIRED:
                    raise ValidationError(f"{section}.{key}: required")
                out[section][key] = default
    return out


def _build(section: str, ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"{section}: {exc}") from None


def _assemble(sections: dict[str, dict[str, object]]) -> tuple[SimScenario, RunSettings]:
    master = _build("master", RobotParams, **sections["master"])
    slave = _build("slave", RobotParams, **sections["slave"])
    human = _build("human", ImpedanceModel, **sections["human"])
    wall = _build("wall", WallModel, **sections["wall"])
    gains = _build("gains", ControllerGains, **sections["gains"])
    c = sections["channel"]
    channel = _build(
        "channel",
        ChannelConfig,
        T=c["period"],
        d1=c["d1"],
        d2=c["d2"],
        eps_min=c["eps_min"],
        alpha=c["alpha"],
    )
    force = _build("operator_force", OperatorForce, **sections["operator_force"])
    noni = None
    if "nonidealities" in sections:
        vals = dict(sections["nonidealities"])
        enabled = vals.pop("enabled")
        if enabled:
            noni = _build("nonidealities", NonidealityConfig, **vals)
    r = sections["run"]
    scenario = _build(
        "run",
        SimScenario,
        master=master,
        slave=slave,
        human=human,
        wall=wall,
        gains=gains,
        channel=channel,
        operator_force=force,
        duration=r["duration"],
        integrator_substeps=r["substeps"],
        nonidealities=noni,
        jitter_sampling=r["jitter"],
        extra_loop_latency=r["extra_loop_latency"],
    )
    run = RunSettings(
        seed=r["seed"],
        grid_points=r["grid_points"],
        position_bound=r["position_bound"],
        settle_window=r["settle_window"],
        settle_tol=r["settle_tol"],
    )
    if run.grid_points < 2:
        raise ValidationError("run.grid_points: must be at least 2")
    if run.position_bound <= 0 or run.settle_window <= 0 or run.settle_tol <= 0:
        raise ValidationError("run: bounds and settle parameters must be positive")
    return scenario, run


def _load_bundle(path) -> tuple[SimScenario, RunSettings]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return _assemble(_read_sections(text, str(path)))


def load_scenario(path) -> SimScenario:
    """Parse and validate a scenario file."""
    return _load_bundle(path)[0]


def load_run_settings(path) -> RunSettings:
    """Parse the [run] extras (seed, grid size, verdict thresholds)."""
    return _load_bundle(path)[1]


def serialize_scenario(sc: SimScenario, run: RunSettings | None = None) -> str:
    """Canonical text form; parsing it back yields an identical scenario."""
    if run is None:
        run = RunSettings()
    buf = io.StringIO()

    def section(name: str, pairs) -> None:
        buf.write(f"[{name}]\n")
        for k, v in pairs:
            if isinstance(v, bool):
                v = "true" if v else "false"
            buf.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")
        buf.write("\n")

    section("master", [("mass", sc.master.mass), ("damping", sc.master.damping)])
    section("slave", [("mass", sc.slave.mass), ("damping", sc.slave.damping)])
    section(
        "human",
        [
            ("mass", sc.human.mass),
            ("damping", sc.human.damping),
            ("stiffness", sc.human.stiffness),
        ],
    )
    section(
        "wall",
        [
            ("position", sc.wall.position),
            ("stiffness", sc.wall.stiffness),
            ("damping", sc.wall.damping),
        ],
    )
    gains = [
        ("kp", sc.gains.kp),
        ("kv", sc.gains.kv),
        ("kd", sc.gains.kd),
        ("p_eps", sc.gains.p_eps),
    ]
    if sc.gains.nu is not None:
        gains.append(("nu", sc.gains.nu))
    section("gains", gains)
    section(
        "channel",
        [
            ("period", sc.channel.T),
            ("d1", sc.channel.d1),
            ("d2", sc.channel.d2),
            ("eps_min", sc.channel.eps_min),
            ("alpha", sc.channel.alpha),
        ],
    )
    section(
        "operator_force",
        [
            ("start", sc.operator_force.start),
            ("stop", sc.operator_force.stop),
            ("magnitude", sc.operator_force.magnitude),
        ],
    )
    if sc.nonidealities is not None:
        n = sc.nonidealities
        section(
            "nonidealities",
            [
                ("enabled", True),
                ("encoder_step", n.encoder_step),
                ("actuator_limit", n.actuator_limit),
                ("force_to_volts", n.force_to_volts),
                ("velocity_filter_cutoff", n.velocity_filter_cutoff),
                ("noise_std", n.noise_std),
            ],
        )
    section(
        "run",
        [
            ("duration", sc.duration),
            ("substeps", sc.integrator_substeps),
            ("seed", run.seed),
            ("grid_points", run.grid_points),
            ("position_bound", run.position_bound),
            ("settle_window", run.settle_window),
            ("settle_tol", run.settle_tol),
            ("jitter", sc.jitter_sampling),
            ("extra_loop_latency", sc.extra_loop_latency),
        ],
    )
    return buf.getvalue()


def save_scenario(sc: SimScenario, path, run: RunSettings | None = None) -> None:
    """Write the canonical text form to ``path``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_scenario(sc, run))


def scenario_hash(sc: SimScenario) -> str:
    """SHA-256 of the canonical serialization (run extras at defaults)."""
    return hashlib.sha256(serialize_scenario(sc).encode("utf-8")).hexdigest()


def build_report(
    sc: SimScenario,
    run: RunSettings,
    stability: StabilityReport | None = None,
    sim_verdict: SimVerdict | None = None,
) -> dict:
    """Self-describing report dict: results plus provenance and units."""
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "teleopstab", "version": __version__},
        "provenance": {
            "scenario_sha256": scenario_hash(sc),
            "seed": run.seed,
            "grid_points": run.grid_points,
            "period_s": sc.channel.T,
            "delays_periods": [sc.channel.d1, sc.channel.d2],
        },
        "units": {
            "position": "rad",
            "velocity": "rad/s",
            "force": "N*m",
            "time": "s",
            "frequency": "rad/s",
        },
    }
    if stability is not None:
        report["stability"] = {
            "small_gain_value": stability.small_gain_value,
            "small_gain_pass": stability.small_gain_pass,
            "argmax_frequency_rad_per_s": stability.argmax_frequency,
            "grid_size": stability.grid_size,
            "excluded_points": stability.excluded_points,
            "damping_bound": stability.damping_bound,
            "damping_bound_pass_master": stability.damping_pass_master,
            "damping_bound_pass_slave": stability.damping_pass_slave,
        }
    if sim_verdict is not None:
        report["simulation"] = {
            "bounded": sim_verdict.bounded,
            "max_abs_position_rad": sim_verdict.max_abs_position,
            "settling_ok": sim_verdict.settling_ok,
            "final_velocity_max_rad_per_s": sim_verdict.final_velocity_max,
            "divergence_time_s": sim_verdict.divergence_time,
        }
    return report


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
