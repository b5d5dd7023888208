"""Scenario, pilot-script, and mission-plan file formats (YAML documents)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .control import ArcState, ControlFrame, ControlParams, UserPose, clamp_ball
from .flightlog import ScoreConfig
from .geodesy import GeodeticPosition, TakeoffDatum
from .mission import MissionAction, MissionPlan, Waypoint
from .protocol import (
    ControlInput,
    Message,
    MissionCommand,
    SafetyOverride,
    UserPoseMsg,
    VehicleAction,
    VehicleCommand,
    WaypointUpload,
)
from .terrain import HeightField, height_at, load_ascii_grid, synthetic_field
from .vehicle import GpsSchedule, VehicleParams


class ScenarioError(ValueError):
    pass


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    terrain: HeightField
    user: UserPose
    vehicle_start: GeodeticPosition     # lat/lon; grounded altitude comes from terrain
    vehicle_yaw_deg: float
    vehicle_params: VehicleParams
    control_params: ControlParams
    score_config: ScoreConfig
    mission_speed_mps: float
    mission_clearance_m: float
    listen_host: str
    listen_port: int
    tick_hz: int
    gps_schedule: GpsSchedule = field(default_factory=GpsSchedule)

    @property
    def tick_ms(self) -> int:
        return 1000 // self.tick_hz

    @property
    def dt_s(self) -> float:
        return self.tick_ms / 1000.0


def _require(cond: bool, msg: str, err: type[ValueError] = ScenarioError) -> None:
    if not cond:
        raise err(msg)


def _build(cls, mapping: dict, what: str, err: type[ValueError] = ScenarioError):
    try:
        return cls(**mapping)
    except (TypeError, ValueError) as exc:
        raise err(f"bad {what}: {exc}") from None


def load_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    _require(isinstance(doc, dict), "scenario document must be a mapping")

    terrain_spec = doc.get("terrain")
    _require(isinstance(terrain_spec, dict), "scenario needs a 'terrain' section")
    terrain = _load_terrain(terrain_spec, base_dir)

    user_spec = doc.get("user")
    _require(isinstance(user_spec, dict) and {"lat", "lon"} <= user_spec.keys(),
             "scenario needs user lat/lon")
    user_pos = GeodeticPosition(float(user_spec["lat"]), float(user_spec["lon"]), 0.0)
    if terrain.contains(user_pos):
        user_pos = GeodeticPosition(user_pos.latitude_deg, user_pos.longitude_deg,
                                    height_at(terrain, user_pos))
    user = _build(UserPose, {"position": user_pos,
                             "heading_deg": float(user_spec.get("heading_deg", 0.0))},
                  "user pose")

    veh = doc.get("vehicle", {})
    _require(isinstance(veh, dict) and isinstance(veh.get("start"), dict)
             and {"lat", "lon"} <= veh["start"].keys(),
             "scenario needs vehicle start lat/lon")
    start = GeodeticPosition(float(veh["start"]["lat"]), float(veh["start"]["lon"]), 0.0)
    _require(terrain.contains(start), "vehicle start is outside the terrain footprint")
    params = _build(VehicleParams, veh.get("params", {}) or {}, "vehicle params")

    control = _build(ControlParams, doc.get("control", {}) or {}, "control params")
    score = _build(ScoreConfig, doc.get("score", {}) or {}, "score config")

    mission = doc.get("mission", {}) or {}
    speed = float(mission.get("speed_mps", 5.0))
    clearance = float(mission.get("clearance_m", 5.0))
    _require(0 < speed <= params.max_h_speed_mps,
             "mission speed must be positive and within the horizontal speed limit")
    _require(clearance >= 0, "clearance must be >= 0")

    listen = doc.get("listen", {}) or {}
    host = str(listen.get("host", "127.0.0.1"))
    port = int(listen.get("port", 8765))
    _require(0 < port < 65536, "listen port out of range")

    tick_hz = int(doc.get("tick_hz", 50))
    _require(tick_hz > 0 and 1000 % tick_hz == 0 and 1000 // tick_hz <= 100,
             "tick_hz must divide 1000 and be at least 10 Hz")

    schedule_spec = doc.get("gps_schedule") or []
    _require(isinstance(schedule_spec, list), "gps_schedule must be a list")
    steps = []
    for entry in schedule_spec:
        _require(isinstance(entry, (list, tuple)) and len(entry) == 2,
                 "gps_schedule entries are [time_s, level] pairs")
        steps.append((float(entry[0]), int(entry[1])))
    schedule = _build(GpsSchedule, {"steps": steps}, "gps schedule")

    return Scenario(
        name=str(doc.get("name", "unnamed")), terrain=terrain, user=user,
        vehicle_start=start, vehicle_yaw_deg=float(veh.get("yaw_deg", 0.0)),
        vehicle_params=params, control_params=control, score_config=score,
        mission_speed_mps=speed, mission_clearance_m=clearance,
        listen_host=host, listen_port=port, tick_hz=tick_hz, gps_schedule=schedule)


def load_scenario_file(path: str | Path) -> Scenario:
    p = Path(path)
    return load_scenario(p.read_text(), base_dir=p.parent)


def _load_terrain(spec: dict, base_dir: Path | None) -> HeightField:
    if "file" in spec:
        grid_path = Path(spec["file"])
        if not grid_path.is_absolute() and base_dir is not None:
            grid_path = base_dir / grid_path
        try:
            return load_ascii_grid(grid_path.read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read terrain file: {exc}") from None
        except ValueError as exc:
            raise ScenarioError(f"bad terrain grid: {exc}") from None
    if "synthetic" in spec:
        syn = dict(spec["synthetic"])
        origin = None
        if "origin_lat" in syn or "origin_lon" in syn:
            origin = GeodeticPosition(float(syn.pop("origin_lat")),
                                      float(syn.pop("origin_lon")), 0.0)
        try:
            return synthetic_field(
                width_m=float(syn.pop("width_m")), depth_m=float(syn.pop("depth_m")),
                slope_m=float(syn.pop("slope_m", 0.0)),
                base_m=float(syn.pop("base_m", 0.0)),
                cell_size_m=float(syn.pop("cell_size_m", 10.0)), origin=origin)
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad synthetic terrain spec: {exc}") from None
    raise ScenarioError("terrain must specify 'file' or 'synthetic'")


# -- pilot scripts -----------------------------------------------------------

@dataclass(frozen=True)
class ScriptEvent:
    time_s: float
    message: Message


@dataclass(frozen=True)
class Script:
    duration_s: float
    events: tuple[ScriptEvent, ...]

    def __post_init__(self) -> None:
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise ScriptError("script duration must be positive")
        times = [e.time_s for e in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ScriptError("script event times must be non-decreasing")


_VEHICLE_ACTIONS = {
    "takeoff": VehicleAction.TAKEOFF,
    "land": VehicleAction.LAND,
    "return-home": VehicleAction.RETURN_HOME,
    "e-stop": VehicleAction.EMERGENCY_STOP,
}
_MISSION_ACTIONS = {
    "start": MissionAction.START,
    "pause": MissionAction.PAUSE,
    "resume": MissionAction.RESUME,
    "abort": MissionAction.ABORT,
}
_FRAMES = {"drone-centric": ControlFrame.DRONE_CENTRIC,
           "user-centric": ControlFrame.USER_CENTRIC}


def load_script(text: str) -> Script:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScriptError(f"not valid YAML: {exc}") from None
    _require(isinstance(doc, dict) and "duration_s" in doc,
             "script needs a duration_s", ScriptError)
    events = []
    for i, entry in enumerate(doc.get("events") or []):
        _require(isinstance(entry, dict) and "t" in entry,
                 f"event {i} needs a time 't'", ScriptError)
        try:
            events.append(ScriptEvent(float(entry["t"]), _event_message(entry)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ScriptError(f"event {i}: {exc}") from None
    return Script(duration_s=float(doc["duration_s"]), events=tuple(events))


def load_script_file(path: str | Path) -> Script:
    return load_script(Path(path).read_text())


def _event_message(entry: dict) -> Message:
    keys = set(entry) - {"t"}
    if keys == {"vehicle"}:
        return VehicleCommand(_VEHICLE_ACTIONS[entry["vehicle"]])
    if keys == {"mission"}:
        return MissionCommand(_MISSION_ACTIONS[entry["mission"]])
    if keys == {"override"}:
        return SafetyOverride(bool(entry["override"]))
    if keys == {"waypoints"}:
        return WaypointUpload(tuple(_waypoint_from_dict(w) for w in entry["waypoints"]))
    if keys == {"control"}:
        c = entry["control"]
        bx, by, bz = (float(v) for v in c.get("ball", (0.0, 0.0, 0.0)))
        ball = clamp_ball(bx, by, bz, engaged=(bx, by, bz) != (0.0, 0.0, 0.0))
        yaw_in = float(c.get("arc_yaw", 0.0))
        pitch_in = float(c.get("arc_pitch", 0.0))
        arc = ArcState(yaw_in, pitch_in, engaged=yaw_in != 0.0 or pitch_in != 0.0)
        return ControlInput(_FRAMES[c.get("frame", "user-centric")], ball, arc)
    if keys == {"user_pose"}:
        p = entry["user_pose"]
        return UserPoseMsg(float(p["lat"]), float(p["lon"]),
                           float(p.get("alt_m", 0.0)), float(p.get("heading_deg", 0.0)))
    raise ValueError(f"unrecognized event keys: {sorted(keys)}")


def _waypoint_from_dict(w: dict) -> Waypoint:
    return Waypoint(
        position=GeodeticPosition(float(w["lat"]), float(w["lon"]),
                                  float(w["alt_rel_m"])),
        heading_deg=float(w.get("heading_deg", 0.0)),
        camera_pitch_deg=float(w.get("camera_pitch_deg", 0.0)),
        is_camera_waypoint=bool(w.get("camera", False)))


# -- mission plan files (for offline scoring) ---------------------------------

def load_plan(text: str) -> MissionPlan:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    _require(isinstance(doc, dict) and isinstance(doc.get("takeoff"), dict)
             and isinstance(doc.get("waypoints"), list),
             "plan needs 'takeoff' and 'waypoints' sections")
    t = doc["takeoff"]
    try:
        datum = TakeoffDatum(
            takeoff_position=GeodeticPosition(float(t["lat"]), float(t["lon"]),
                                              float(t["terrain_height_m"])),
            terrain_height_m=float(t["terrain_height_m"]))
        waypoints = tuple(_waypoint_from_dict(w) for w in doc["waypoints"])
        return MissionPlan(waypoints=waypoints, takeoff_datum=datum,
                           speed_mps=float(doc.get("speed_mps", 5.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad plan: {exc}") from None


def load_plan_file(path: str | Path) -> MissionPlan:
    return load_plan(Path(path).read_text())


def save_plan(plan: MissionPlan) -> str:
    doc = {
        "speed_mps": plan.speed_mps,
        "takeoff": {
            "lat": plan.takeoff_datum.takeoff_position.latitude_deg,
            "lon": plan.takeoff_datum.takeoff_position.longitude_deg,
            "terrain_height_m": plan.takeoff_datum.terrain_height_m,
        },
        "waypoints": [
            {
                "lat": wp.position.latitude_deg,
                "lon": wp.position.longitude_deg,
                "alt_rel_m": wp.alt_rel_m,
                "heading_deg": wp.heading_deg,
                "camera_pitch_deg": wp.camera_pitch_deg,
                "camera": wp.is_camera_waypoint,
            }
            for wp in plan.waypoints
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False)


def load_score_config(text: str) -> ScoreConfig:
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    _require(isinstance(doc, dict), "score config must be a mapping")
    return _build(ScoreConfig, doc, "score config")
