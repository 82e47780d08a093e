"""Scenario configuration: one JSON object shared by the CLI and the service.

CLI flags override config fields; the port resolves as
--port > STAR_PORT env var > config "port" > 8765.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from star_repair.coverage import PlannerParams, ReachabilityModel
from star_repair.errors import ConfigError
from star_repair.geom import Point3

DEFAULT_PORT = 8765


@dataclass
class ScenarioConfig:
    cloud: Optional[Path] = None
    grid: Optional[Path] = None
    port: int = DEFAULT_PORT
    asset_dir: Optional[Path] = None
    ui_dir: Optional[Path] = None
    log_dir: Path = Path("logs")
    image_uri: str = ""
    start_cell: Optional[tuple[int, int]] = None
    params: PlannerParams = field(default_factory=PlannerParams)
    detection_radius: float = 0.05
    min_cluster_size: int = 30
    standoff: float = 0.8
    footprint_radius: float = 0.3
    shoulder_height: Optional[float] = None  # derive reach shoulder above the goal
    execution_step_seconds: float = 0.2


def params_to_dict(params: PlannerParams) -> dict:
    out = {
        "offset": params.offset,
        "spacing": params.spacing,
        "k": params.k,
        "roll_candidates": params.roll_candidates,
        "viewpoint": list(params.viewpoint.as_tuple()),
    }
    if params.reach is not None:
        out["reach"] = {
            "shoulder": list(params.reach.shoulder.as_tuple()),
            "r_min": params.reach.r_min,
            "r_max": params.reach.r_max,
            "cone_half_angle": params.reach.cone_half_angle,
        }
    return out


def params_from_dict(raw: dict) -> PlannerParams:
    try:
        reach = None
        if "reach" in raw and raw["reach"] is not None:
            r = raw["reach"]
            reach = ReachabilityModel(
                shoulder=Point3(*r.get("shoulder", (0.0, 0.0, 0.0))),
                r_min=float(r.get("r_min", 0.2)),
                r_max=float(r.get("r_max", 1.0)),
                cone_half_angle=float(r.get("cone_half_angle", 1.2)),
            )
        return PlannerParams(
            offset=float(raw.get("offset", PlannerParams.offset)),
            spacing=float(raw.get("spacing", PlannerParams.spacing)),
            k=int(raw.get("k", PlannerParams.k)),
            roll_candidates=int(raw.get("roll_candidates", PlannerParams.roll_candidates)),
            reach=reach,
            viewpoint=Point3(*raw.get("viewpoint", (0.0, 0.0, 0.0))),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid planner params: {exc}") from None


def _validate(config: ScenarioConfig) -> ScenarioConfig:
    checks = [
        (config.params.offset > 0, "params.offset must be > 0"),
        (config.params.spacing > 0, "params.spacing must be > 0"),
        (config.params.k >= 3, "params.k must be >= 3"),
        (config.params.roll_candidates >= 1, "params.roll_candidates must be >= 1"),
        (config.detection_radius > 0, "detection.radius must be > 0"),
        (config.min_cluster_size >= 1, "detection.min_size must be >= 1"),
        (config.footprint_radius > 0, "base.footprint_radius must be > 0"),
        (config.standoff > config.footprint_radius,
         "base.standoff must exceed base.footprint_radius"),
        (0 < config.port < 65536, "port must be in 1..65535"),
        (config.execution_step_seconds >= 0, "execution_step_seconds must be >= 0"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    for label, path in (("cloud", config.cloud), ("grid", config.grid)):
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"{label} file does not exist: {path}")
    return config


def load_config(path: Path) -> ScenarioConfig:
    """Read and validate a scenario config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid json: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a json object")

    base = raw.get("base", {})
    detection = raw.get("detection", {})
    root = path.parent

    def resolve(key):
        if raw.get(key) is None:
            return None
        p = Path(raw[key])
        return p if p.is_absolute() else root / p

    try:
        config = ScenarioConfig(
            cloud=resolve("cloud"),
            grid=resolve("grid"),
            port=int(raw.get("port", DEFAULT_PORT)),
            asset_dir=resolve("asset_dir"),
            ui_dir=resolve("ui_dir"),
            log_dir=resolve("log_dir") or (root / "logs"),
            image_uri=str(raw.get("image_uri", "")),
            start_cell=tuple(raw["start_cell"]) if raw.get("start_cell") else None,
            params=params_from_dict(raw.get("params", {})),
            detection_radius=float(detection.get("radius", 0.05)),
            min_cluster_size=int(detection.get("min_size", 30)),
            standoff=float(base.get("standoff", 0.8)),
            footprint_radius=float(base.get("footprint_radius", 0.3)),
            shoulder_height=(
                float(raw["shoulder_height"]) if raw.get("shoulder_height") is not None else None
            ),
            execution_step_seconds=float(raw.get("execution_step_seconds", 0.2)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config {path}: {exc}") from None
    return _validate(config)


def resolve_port(cli_port: Optional[int], config: ScenarioConfig) -> int:
    """--port beats STAR_PORT beats the config file."""
    if cli_port is not None:
        return cli_port
    env = os.environ.get("STAR_PORT")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"STAR_PORT is not an integer: {env!r}") from None
    return config.port
