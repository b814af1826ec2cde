"""JSON pipeline configuration.

Top-level keys are ``array``, ``sensor``, ``acquisition``, ``solver``,
``server`` and ``trajectory``; every key is optional and unknown keys are
rejected. See README.md for the full schema.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .acquisition import AcquisitionConfig, TrajectorySpec
from .errors import NyquistViolation, ParseError, ValidationError
from .fieldmodel import CoilSpec, SensorSpec, TransmitterArray, default_array
from .filter import build_demod
from .igtlink import DEFAULT_DEVICE, DEFAULT_PORT
from .pose import Pose5DOF
from .solver import Bounds, SolverSettings

TOP_LEVEL_KEYS = ("array", "sensor", "acquisition", "solver", "server", "trajectory")


@dataclass(frozen=True)
class ServerConfig:
    host: str = "0.0.0.0"
    port: int = DEFAULT_PORT
    device: str = DEFAULT_DEVICE


@dataclass(frozen=True)
class PipelineConfig:
    array: TransmitterArray = field(default_factory=default_array)
    sensor: SensorSpec = field(default_factory=SensorSpec)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    solver: SolverSettings = field(default_factory=SolverSettings)
    bounds: Bounds = field(default_factory=Bounds)
    server: ServerConfig = field(default_factory=ServerConfig)
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)

    def __post_init__(self):
        validate(self)


def validate(cfg: PipelineConfig) -> None:
    try:
        cfg.acquisition.check_nyquist(cfg.array)
    except NyquistViolation as exc:
        raise ValidationError(f"Nyquist: {exc}") from None
    if cfg.array.K < 5:
        raise ValidationError("array: K >= 5 required")
    if not cfg.bounds.lower[2] > 0:
        raise ValidationError("solver.bounds: z lower bound must be above the coil plane")
    if not cfg.bounds.contains(cfg.trajectory.start_pose, tol=0.0):
        raise ValidationError("trajectory.start_pose lies outside solver bounds")
    if not 0 < cfg.server.port < 65536:
        raise ValidationError(f"server.port out of range: {cfg.server.port}")


def bin_alignment(cfg: PipelineConfig) -> tuple[bool, ...]:
    """Per-coil bin alignment at the configured frame size (misalignment leaks)."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        demod = build_demod(cfg.array.frequencies, cfg.acquisition.frame_size, cfg.acquisition.sample_rate)
    return demod.bin_aligned


def _check_keys(section: str, data: Any, allowed) -> dict:
    if not isinstance(data, dict):
        raise ValidationError(f"{section}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValidationError(f"{section}: unknown key(s) {unknown}")
    return data


def _simple(section: str, cls, data: dict, exclude=()):
    names = [f.name for f in fields(cls) if f.name not in exclude]
    _check_keys(section, data, names)
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{section}: {exc}") from None


_COIL_KEYS = ("center", "axis", "moment", "frequency", "loop_radius", "calibration_scale")


def _parse_array(data: dict) -> TransmitterArray:
    _check_keys("array", data, ("coils",))
    if "coils" not in data:
        return default_array()
    coils = []
    for k, c in enumerate(data["coils"]):
        _check_keys(f"array.coils[{k}]", c, _COIL_KEYS)
        missing = [key for key in ("center", "frequency") if key not in c]
        if missing:
            raise ValidationError(f"array.coils[{k}]: missing {missing}")
        try:
            coils.append(CoilSpec(
                id=k,
                center=c["center"],
                axis=c.get("axis", (0.0, 0.0, 1.0)),
                moment_magnitude=c.get("moment", 0.5),
                frequency=c["frequency"],
                loop_radius=c.get("loop_radius", 0.01),
                calibration_scale=c.get("calibration_scale", 1.0),
            ))
        except ValueError as exc:
            raise ValidationError(f"array.coils[{k}]: {exc}") from None
    try:
        return TransmitterArray(tuple(coils))
    except ValueError as exc:
        raise ValidationError(f"array: {exc}") from None


def _parse_solver(data: dict) -> tuple[SolverSettings, Bounds]:
    names = [f.name for f in fields(SolverSettings)]
    _check_keys("solver", data, names + ["bounds"])
    settings = _simple("solver", SolverSettings, {k: v for k, v in data.items() if k != "bounds"})
    b = data.get("bounds", {})
    _check_keys("solver.bounds", b, ("lower", "upper"))
    default = Bounds()
    try:
        bounds = Bounds(tuple(b.get("lower", default.lower)), tuple(b.get("upper", default.upper)))
    except ValueError as exc:
        raise ValidationError(f"solver.bounds: {exc}") from None
    return settings, bounds


_POSE_KEYS = ("x", "y", "z", "theta", "phi")


def _parse_trajectory(data: dict) -> TrajectorySpec:
    _check_keys("trajectory", data, ("kind", "start_pose", "velocity", "angular_velocity", "box"))
    kw = dict(data)
    if "start_pose" in kw:
        pose = _check_keys("trajectory.start_pose", kw["start_pose"], _POSE_KEYS)
        kw["start_pose"] = Pose5DOF(**{**asdict(TrajectorySpec().start_pose), **pose})
    if kw.get("box") is not None:
        box = _check_keys("trajectory.box", kw["box"], ("lower", "upper"))
        kw["box"] = (tuple(box["lower"]), tuple(box["upper"]))
    try:
        return TrajectorySpec(**kw)
    except (TypeError, ValueError, KeyError) as exc:
        raise ValidationError(f"trajectory: {exc}") from None


def config_from_dict(data: dict) -> PipelineConfig:
    _check_keys("config", data, TOP_LEVEL_KEYS)
    settings, bounds = _parse_solver(data.get("solver", {}))
    return PipelineConfig(
        array=_parse_array(data.get("array", {})),
        sensor=_simple("sensor", SensorSpec, data.get("sensor", {})),
        acquisition=_simple("acquisition", AcquisitionConfig, data.get("acquisition", {})),
        solver=settings,
        bounds=bounds,
        server=_simple("server", ServerConfig, data.get("server", {})),
        trajectory=_parse_trajectory(data.get("trajectory", {})),
    )


def load_config(path) -> PipelineConfig:
    """Read and validate a JSON config file; absent keys take defaults."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return config_from_dict(data)


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Full explicit form of ``cfg``; ``config_from_dict`` inverts it."""
    traj = cfg.trajectory
    return {
        "array": {
            "coils": [
                {
                    "center": list(c.center),
                    "axis": list(c.axis),
                    "moment": c.moment_magnitude,
                    "frequency": c.frequency,
                    "loop_radius": c.loop_radius,
                    "calibration_scale": c.calibration_scale,
                }
                for c in cfg.array.coils
            ]
        },
        "sensor": asdict(cfg.sensor),
        "acquisition": asdict(cfg.acquisition),
        "solver": {**asdict(cfg.solver), "bounds": {"lower": list(cfg.bounds.lower), "upper": list(cfg.bounds.upper)}},
        "server": asdict(cfg.server),
        "trajectory": {
            "kind": traj.kind,
            "start_pose": asdict(traj.start_pose),
            "velocity": list(traj.velocity),
            "angular_velocity": traj.angular_velocity,
            "box": None if traj.box is None else {"lower": list(traj.box[0]), "upper": list(traj.box[1])},
        },
    }


def dump_config(cfg: PipelineConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)
