"""Waypoint missions: plan model, terrain-clearance validation, trajectory
preview, control transitions, and the autonomous executor."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .geodesy import (
    EnuVector,
    GeodeticPosition,
    GeoReference,
    TakeoffDatum,
    enu_to_geodetic,
    geodetic_to_enu,
    normalize_angle_deg,
    takeoff_rel_to_wgs84,
    wrap_angle_180,
)
from .terrain import HeightField, TerrainOutOfBoundsError, height_at
from .vehicle import (
    FlightPhase,
    InvalidTransitionError,
    VehicleParams,
    VehicleState,
    VelocityCommand,
)

MAX_WAYPOINTS = 99
MIN_WAYPOINT_SPACING_M = 0.5
DEFAULT_CLEARANCE_M = 5.0
DEFAULT_CRUISE_SPEED_MPS = 5.0
ARRIVAL_RADIUS_M = 2.0
SLOWDOWN_RADIUS_M = 5.0
_SEGMENT_SAMPLE_M = 1.0
_YAW_GAIN_PER_S = 2.0


@dataclass(frozen=True)
class Waypoint:
    """A mission target. ``position.altitude_m`` is takeoff-relative, not WGS84."""

    position: GeodeticPosition
    heading_deg: float
    camera_pitch_deg: float = 0.0
    is_camera_waypoint: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading_deg", normalize_angle_deg(self.heading_deg))
        if not (-90.0 <= self.camera_pitch_deg <= 0.0):
            raise ValueError("camera pitch must lie in [-90, 0]")
        if self.position.altitude_m < 0.0:
            raise ValueError("waypoint takeoff-relative altitude must be >= 0")

    @property
    def alt_rel_m(self) -> float:
        return self.position.altitude_m


@dataclass(frozen=True)
class MissionPlan:
    waypoints: tuple[Waypoint, ...]
    takeoff_datum: TakeoffDatum
    speed_mps: float = DEFAULT_CRUISE_SPEED_MPS

    def __post_init__(self) -> None:
        if not (1 <= len(self.waypoints) <= MAX_WAYPOINTS):
            raise ValueError(f"plan must hold 1..{MAX_WAYPOINTS} waypoints")
        if sum(wp.is_camera_waypoint for wp in self.waypoints) > 1:
            raise ValueError("at most one camera waypoint per plan")
        if not (self.speed_mps > 0 and math.isfinite(self.speed_mps)):
            raise ValueError("cruise speed must be positive")
        ref = GeoReference(self.takeoff_datum.takeoff_position)
        pts = [_waypoint_enu(wp, self.takeoff_datum, ref) for wp in self.waypoints]
        for i in range(1, len(pts)):
            if (pts[i] - pts[i - 1]).norm() < MIN_WAYPOINT_SPACING_M:
                raise ValueError(
                    f"waypoints {i - 1} and {i} closer than {MIN_WAYPOINT_SPACING_M} m")


class MissionState(Enum):
    IDLE = 0
    UPLOADED = 1
    RUNNING = 2
    PAUSED = 3
    COMPLETED = 4
    ABORTED = 5


ACTIVE_MISSION_STATES = frozenset({MissionState.UPLOADED, MissionState.RUNNING,
                                   MissionState.PAUSED})


@dataclass(frozen=True)
class MissionStatus:
    state: MissionState = MissionState.IDLE
    current_index: int = 0
    photo_taken: bool = False


class MissionAction(Enum):
    START = 0
    PAUSE = 1
    RESUME = 2
    ABORT = 3


def mission_control(status: MissionStatus, action: MissionAction) -> MissionStatus:
    """Apply a start/pause/resume/abort transition or raise on an illegal one."""
    state = status.state
    if action is MissionAction.START:
        if state is not MissionState.UPLOADED:
            raise InvalidTransitionError(f"start not allowed from {state.name}")
        return replace(status, state=MissionState.RUNNING, current_index=0,
                       photo_taken=False)
    if action is MissionAction.PAUSE:
        if state is not MissionState.RUNNING:
            raise InvalidTransitionError(f"pause not allowed from {state.name}")
        return replace(status, state=MissionState.PAUSED)
    if action is MissionAction.RESUME:
        if state is not MissionState.PAUSED:
            raise InvalidTransitionError(f"resume not allowed from {state.name}")
        return replace(status, state=MissionState.RUNNING)
    if action is MissionAction.ABORT:
        if state not in ACTIVE_MISSION_STATES:
            raise InvalidTransitionError(f"abort not allowed from {state.name}")
        return replace(status, state=MissionState.ABORTED)
    raise ValueError(f"unknown action {action}")


@dataclass(frozen=True)
class Violation:
    kind: str                     # "waypoint-below-clearance" | "segment-below-clearance" | "out-of-bounds"
    segment_index: int            # waypoint index, or start index of the offending leg
    location: GeodeticPosition
    deficit_m: float              # clearance shortfall; 0 when out of bounds


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_plan(plan: MissionPlan, terrain: HeightField,
                  clearance_m: float = DEFAULT_CLEARANCE_M) -> ValidationReport:
    """Check every waypoint and every straight leg (sampled at 1 m) against
    terrain plus the required clearance. Reports each offending waypoint and
    each offending leg with its deepest sample."""
    datum = plan.takeoff_datum
    ref = GeoReference(datum.takeoff_position)
    violations: list[Violation] = []

    enu_points: list[EnuVector] = []
    for i, wp in enumerate(plan.waypoints):
        alt_wgs84 = takeoff_rel_to_wgs84(wp.alt_rel_m, datum)
        pos = GeodeticPosition(wp.position.latitude_deg, wp.position.longitude_deg,
                               alt_wgs84)
        enu_points.append(geodetic_to_enu(pos, ref))
        try:
            ground = height_at(terrain, pos)
        except TerrainOutOfBoundsError:
            violations.append(Violation("out-of-bounds", i, pos, 0.0))
            continue
        deficit = (ground + clearance_m) - alt_wgs84
        if deficit > 0.0:
            violations.append(Violation("waypoint-below-clearance", i, pos, deficit))

    for i in range(len(enu_points) - 1):
        a, b = enu_points[i], enu_points[i + 1]
        leg = b - a
        length = leg.norm()
        n_samples = max(1, math.ceil(length / _SEGMENT_SAMPLE_M))
        worst: Violation | None = None
        for k in range(1, n_samples):
            t = k / n_samples
            sample = a + leg.scaled(t)
            pos = enu_to_geodetic(sample, ref)
            try:
                ground = height_at(terrain, pos)
            except TerrainOutOfBoundsError:
                worst = Violation("out-of-bounds", i, pos, 0.0)
                break
            deficit = (ground + clearance_m) - pos.altitude_m
            if deficit > 0.0 and (worst is None or deficit > worst.deficit_m):
                worst = Violation("segment-below-clearance", i, pos, deficit)
        if worst is not None:
            violations.append(worst)

    return ValidationReport(tuple(violations))


def preview_polyline(plan: MissionPlan, samples_per_segment: int = 0) -> list[GeodeticPosition]:
    """Straight-segment interpolation of the planned path, waypoint vertices
    included in order. Altitudes stay takeoff-relative like the waypoints'."""
    if samples_per_segment < 0:
        raise ValueError("samples_per_segment must be >= 0")
    pts = [plan.waypoints[0].position]
    for i in range(1, len(plan.waypoints)):
        a = plan.waypoints[i - 1].position
        b = plan.waypoints[i].position
        for k in range(1, samples_per_segment + 1):
            t = k / (samples_per_segment + 1)
            pts.append(GeodeticPosition(
                a.latitude_deg + (b.latitude_deg - a.latitude_deg) * t,
                a.longitude_deg + (b.longitude_deg - a.longitude_deg) * t,
                a.altitude_m + (b.altitude_m - a.altitude_m) * t))
        pts.append(b)
    return pts


def executor_step(status: MissionStatus, plan: MissionPlan, vehicle: VehicleState,
                  params: VehicleParams,
                  arrival_radius_m: float = ARRIVAL_RADIUS_M,
                  ) -> tuple[VelocityCommand, MissionStatus]:
    """One guidance step of the autonomous executor.

    Flies toward the current waypoint at plan speed (proportional slow-down
    inside the slow-down radius), steers yaw along the leg toward the
    waypoint heading, and slews the gimbal toward the waypoint camera pitch.
    Arrival within ``arrival_radius_m`` advances the index; arriving at a
    camera waypoint latches the photo flag; passing the last waypoint
    completes the mission.
    """
    if status.state is not MissionState.RUNNING:
        raise InvalidTransitionError("executor requires a running mission")
    if vehicle.phase in (FlightPhase.CRASHED, FlightPhase.EMERGENCY_STOPPED):
        return VelocityCommand.hold(), replace(status, state=MissionState.ABORTED)

    datum = plan.takeoff_datum
    ref = GeoReference(datum.takeoff_position)
    here = geodetic_to_enu(vehicle.position, ref)

    index = status.current_index
    photo = status.photo_taken
    target = _waypoint_enu(plan.waypoints[index], datum, ref)
    while (target - here).norm() <= arrival_radius_m:
        if plan.waypoints[index].is_camera_waypoint:
            photo = True
        index += 1
        if index >= len(plan.waypoints):
            return (VelocityCommand.hold(),
                    MissionStatus(MissionState.COMPLETED, len(plan.waypoints) - 1, photo))
        target = _waypoint_enu(plan.waypoints[index], datum, ref)

    to_target = target - here
    dist = to_target.norm()
    speed = plan.speed_mps
    if dist < SLOWDOWN_RADIUS_M:
        speed = speed * dist / SLOWDOWN_RADIUS_M
    v = to_target.scaled(speed / dist)
    scale = 1.0
    h = v.horizontal_norm()
    if h > params.max_h_speed_mps:
        scale = min(scale, params.max_h_speed_mps / h)
    if abs(v.up_m) > params.max_v_speed_mps:
        scale = min(scale, params.max_v_speed_mps / abs(v.up_m))
    v = v.scaled(scale)

    desired_yaw = _leg_heading(plan, index, here, target, ref)
    yaw_rate = wrap_angle_180(desired_yaw - vehicle.yaw_deg) * _YAW_GAIN_PER_S
    yaw_rate = max(-params.max_yaw_rate_dps, min(params.max_yaw_rate_dps, yaw_rate))

    cmd = VelocityCommand(v_enu_cmd=v, yaw_rate_cmd_dps=yaw_rate,
                          gimbal_pitch_target_deg=plan.waypoints[index].camera_pitch_deg)
    return cmd, MissionStatus(MissionState.RUNNING, index, photo)


def _waypoint_enu(wp: Waypoint, datum: TakeoffDatum, ref: GeoReference) -> EnuVector:
    pos = GeodeticPosition(wp.position.latitude_deg, wp.position.longitude_deg,
                           takeoff_rel_to_wgs84(wp.alt_rel_m, datum))
    return geodetic_to_enu(pos, ref)


def _leg_heading(plan: MissionPlan, index: int, here: EnuVector, target: EnuVector,
                 ref: GeoReference) -> float:
    """Shortest-arc heading interpolated by fraction of leg flown; the first
    leg has no prior waypoint heading, so it targets the waypoint's directly."""
    to_wp = plan.waypoints[index].heading_deg
    if index == 0:
        return to_wp
    from_wp = plan.waypoints[index - 1].heading_deg
    prev = _waypoint_enu(plan.waypoints[index - 1], plan.takeoff_datum, ref)
    leg_len = (target - prev).norm()
    remaining = (target - here).norm()
    frac = 1.0 if leg_len == 0.0 else min(1.0, max(0.0, 1.0 - remaining / leg_len))
    return normalize_angle_deg(from_wp + wrap_angle_180(to_wp - from_wp) * frac)
