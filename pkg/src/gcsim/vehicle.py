"""Deterministic fixed-step quadrotor kinematics.

The vehicle tracks commanded world-frame velocities with a first-order
response, enforces speed limits, drains battery while airborne, and walks a
small flight-phase state machine (takeoff, landing, return-home, emergency
stop, crash-on-terrain-contact). There is no aerodynamic model: verification
targets the resulting velocity behavior, not attitude dynamics.
"""

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
)
from .terrain import HeightField, TerrainOutOfBoundsError, height_at


class InvalidTransitionError(RuntimeError):
    """A command was issued in a flight phase where it is not legal."""


class FlightPhase(Enum):
    GROUNDED = 0
    TAKING_OFF = 1
    HOVERING = 2
    MANUAL = 3
    MISSION = 4
    RETURNING_HOME = 5
    LANDING = 6
    EMERGENCY_STOPPED = 7
    CRASHED = 8


AIRBORNE_PHASES = frozenset({
    FlightPhase.TAKING_OFF, FlightPhase.HOVERING, FlightPhase.MANUAL,
    FlightPhase.MISSION, FlightPhase.RETURNING_HOME, FlightPhase.LANDING,
    FlightPhase.EMERGENCY_STOPPED,
})


@dataclass(frozen=True)
class VehicleParams:
    max_h_speed_mps: float = 10.0
    max_v_speed_mps: float = 4.0
    max_yaw_rate_dps: float = 90.0
    response_tau_s: float = 0.5
    takeoff_alt_rel_m: float = 1.2
    battery_capacity_s: float = 1200.0
    gimbal_rate_dps: float = 60.0

    def __post_init__(self) -> None:
        vals = (self.max_h_speed_mps, self.max_v_speed_mps, self.max_yaw_rate_dps,
                self.response_tau_s, self.takeoff_alt_rel_m,
                self.battery_capacity_s, self.gimbal_rate_dps)
        if not all(v > 0 and math.isfinite(v) for v in vals):
            raise ValueError("all vehicle parameters must be positive")


@dataclass(frozen=True)
class VelocityCommand:
    """Desired world-frame velocity, yaw rate, and gimbal pitch set-point.

    ``gimbal_pitch_target_deg`` of ``None`` holds the current gimbal pitch.
    """

    v_enu_cmd: EnuVector
    yaw_rate_cmd_dps: float = 0.0
    gimbal_pitch_target_deg: float | None = None

    @classmethod
    def hold(cls) -> "VelocityCommand":
        return cls(v_enu_cmd=EnuVector(0.0, 0.0, 0.0), yaw_rate_cmd_dps=0.0,
                   gimbal_pitch_target_deg=None)

    def is_motionless(self) -> bool:
        return self.v_enu_cmd.norm() == 0.0 and self.yaw_rate_cmd_dps == 0.0


@dataclass(frozen=True)
class VehicleState:
    position: GeodeticPosition
    velocity_enu: EnuVector
    yaw_deg: float
    yaw_rate_dps: float
    gimbal_pitch_deg: float
    battery_pct: float
    gps_level: int
    phase: FlightPhase
    time_s: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw_deg", normalize_angle_deg(self.yaw_deg))
        if not (-90.0 <= self.gimbal_pitch_deg <= 0.0):
            raise ValueError("gimbal pitch must lie in [-90, 0]")
        if not (0 <= self.gps_level <= 5):
            raise ValueError("gps level must lie in [0, 5]")
        if not (0.0 <= self.battery_pct <= 100.0):
            raise ValueError("battery must lie in [0, 100]")


def limit_command(cmd: VelocityCommand, params: VehicleParams) -> VelocityCommand:
    """Clamp a command to the vehicle's speed and yaw-rate limits."""
    v = cmd.v_enu_cmd
    h = v.horizontal_norm()
    ve, vn = v.east_m, v.north_m
    if h > params.max_h_speed_mps:
        k = params.max_h_speed_mps / h
        ve, vn = ve * k, vn * k
    vu = max(-params.max_v_speed_mps, min(params.max_v_speed_mps, v.up_m))
    yr = max(-params.max_yaw_rate_dps, min(params.max_yaw_rate_dps, cmd.yaw_rate_cmd_dps))
    gt = cmd.gimbal_pitch_target_deg
    if gt is not None:
        gt = max(-90.0, min(0.0, gt))
    return VelocityCommand(EnuVector(ve, vn, vu), yr, gt)


def step(state: VehicleState, cmd: VelocityCommand, dt: float,
         params: VehicleParams, terrain: HeightField) -> VehicleState:
    """Advance one fixed step: first-order velocity tracking, dead-reckoned
    position through the local tangent frame, gimbal slew, battery drain,
    and terrain-contact handling. Pure and deterministic."""
    if not (0.0 < dt <= 0.1):
        raise ValueError("dt must lie in (0, 0.1] s")

    if state.phase in (FlightPhase.GROUNDED, FlightPhase.CRASHED):
        return replace(state, time_s=state.time_s + dt)
    if state.phase is FlightPhase.EMERGENCY_STOPPED:
        battery = _drain(state.battery_pct, dt, params)
        return replace(state, velocity_enu=EnuVector(0.0, 0.0, 0.0),
                       yaw_rate_dps=0.0, battery_pct=battery,
                       time_s=state.time_s + dt)

    cmd = limit_command(cmd, params)

    # first-order velocity response, then re-clamp
    alpha = dt / params.response_tau_s
    v = state.velocity_enu
    c = cmd.v_enu_cmd
    v = EnuVector(v.east_m + (c.east_m - v.east_m) * alpha,
                  v.north_m + (c.north_m - v.north_m) * alpha,
                  v.up_m + (c.up_m - v.up_m) * alpha)
    h = v.horizontal_norm()
    if h > params.max_h_speed_mps:
        k = params.max_h_speed_mps / h
        v = EnuVector(v.east_m * k, v.north_m * k, v.up_m)
    if abs(v.up_m) > params.max_v_speed_mps:
        v = EnuVector(v.east_m, v.north_m,
                      math.copysign(params.max_v_speed_mps, v.up_m))

    if v.east_m == 0.0 and v.north_m == 0.0 and v.up_m == 0.0:
        position = state.position  # exact hover fixed point
    else:
        ref = GeoReference(state.position)
        position = enu_to_geodetic(
            EnuVector(v.east_m * dt, v.north_m * dt, v.up_m * dt), ref)

    yaw_rate = cmd.yaw_rate_cmd_dps
    yaw = normalize_angle_deg(state.yaw_deg + yaw_rate * dt)

    gimbal = state.gimbal_pitch_deg
    if cmd.gimbal_pitch_target_deg is not None:
        delta = cmd.gimbal_pitch_target_deg - gimbal
        max_slew = params.gimbal_rate_dps * dt
        gimbal += max(-max_slew, min(max_slew, delta))

    battery = _drain(state.battery_pct, dt, params)
    phase = state.phase

    try:
        ground = height_at(terrain, position)
    except TerrainOutOfBoundsError:
        ground = None  # off the mapped footprint: no contact check possible
    if ground is not None and position.altitude_m < ground:
        position = GeodeticPosition(position.latitude_deg, position.longitude_deg, ground)
        v = EnuVector(0.0, 0.0, 0.0)
        if phase in (FlightPhase.LANDING, FlightPhase.TAKING_OFF):
            phase = FlightPhase.GROUNDED
        else:
            phase = FlightPhase.CRASHED

    return VehicleState(position=position, velocity_enu=v, yaw_deg=yaw,
                        yaw_rate_dps=yaw_rate, gimbal_pitch_deg=gimbal,
                        battery_pct=battery, gps_level=state.gps_level,
                        phase=phase, time_s=state.time_s + dt)


def _drain(battery_pct: float, dt: float, params: VehicleParams) -> float:
    return max(0.0, battery_pct - 100.0 * dt / params.battery_capacity_s)


class GpsSchedule:
    """Scripted GPS signal level: piecewise-constant steps over sim time."""

    def __init__(self, steps: list[tuple[float, int]] | None = None, default: int = 5):
        self.default = default
        self.steps = sorted(steps or [])
        for _, level in self.steps:
            if not (0 <= level <= 5):
                raise ValueError("gps level must lie in [0, 5]")

    def level_at(self, time_s: float) -> int:
        level = self.default
        for t, value in self.steps:
            if time_s >= t:
                level = value
            else:
                break
        return level


class VehicleSim:
    """Single-writer stateful wrapper: phase transitions plus per-phase
    internal guidance (takeoff climb, landing descent, return-home)."""

    MIN_TAKEOFF_BATTERY_PCT = 10.0
    _HOME_ARRIVAL_M = 0.5
    _RTH_APPROACH_GAIN = 1.0  # commanded speed per meter of remaining distance

    def __init__(self, start: GeodeticPosition, params: VehicleParams,
                 terrain: HeightField, yaw_deg: float = 0.0,
                 gps_schedule: GpsSchedule | None = None):
        ground = height_at(terrain, start)
        self.params = params
        self.terrain = terrain
        self.gps_schedule = gps_schedule or GpsSchedule()
        self.datum = TakeoffDatum(
            GeodeticPosition(start.latitude_deg, start.longitude_deg, ground), ground)
        self.home = self.datum.takeoff_position
        self.state = VehicleState(
            position=self.datum.takeoff_position,
            velocity_enu=EnuVector(0.0, 0.0, 0.0),
            yaw_deg=yaw_deg, yaw_rate_dps=0.0, gimbal_pitch_deg=0.0,
            battery_pct=100.0, gps_level=self.gps_schedule.level_at(0.0),
            phase=FlightPhase.GROUNDED, time_s=0.0)
        self._mission_active = False

    @property
    def airborne(self) -> bool:
        return self.state.phase in AIRBORNE_PHASES

    def alt_rel_m(self) -> float:
        return self.state.position.altitude_m - self.datum.terrain_height_m

    # -- command entry points ------------------------------------------------

    def request_takeoff(self) -> None:
        phase = self.state.phase
        if phase is FlightPhase.TAKING_OFF:
            return  # duplicate command, tolerate retries
        if phase is not FlightPhase.GROUNDED:
            raise InvalidTransitionError(f"takeoff not allowed from {phase.name}")
        if self.state.battery_pct <= self.MIN_TAKEOFF_BATTERY_PCT:
            raise InvalidTransitionError(
                f"takeoff refused: battery {self.state.battery_pct:.0f}% too low")
        ground = height_at(self.terrain, self.state.position)
        self.datum = TakeoffDatum(
            GeodeticPosition(self.state.position.latitude_deg,
                             self.state.position.longitude_deg, ground), ground)
        self.home = self.datum.takeoff_position
        self.state = replace(self.state, phase=FlightPhase.TAKING_OFF)

    def request_land(self) -> None:
        phase = self.state.phase
        if phase is FlightPhase.LANDING:
            return
        if phase in (FlightPhase.GROUNDED, FlightPhase.CRASHED,
                     FlightPhase.EMERGENCY_STOPPED):
            raise InvalidTransitionError(f"land not allowed from {phase.name}")
        self._mission_active = False
        self.state = replace(self.state, phase=FlightPhase.LANDING)

    def request_return_home(self, home: GeodeticPosition | None = None) -> None:
        phase = self.state.phase
        if phase is FlightPhase.RETURNING_HOME:
            return
        if phase not in (FlightPhase.HOVERING, FlightPhase.MANUAL,
                         FlightPhase.MISSION, FlightPhase.TAKING_OFF):
            raise InvalidTransitionError(f"return-home not allowed from {phase.name}")
        if home is not None:
            self.home = home
        self._mission_active = False
        self.state = replace(self.state, phase=FlightPhase.RETURNING_HOME)

    def request_emergency_stop(self) -> None:
        self._mission_active = False
        self.state = replace(self.state, phase=FlightPhase.EMERGENCY_STOPPED,
                             velocity_enu=EnuVector(0.0, 0.0, 0.0), yaw_rate_dps=0.0)

    def reset_emergency(self) -> None:
        """Explicit recovery from the absorbing emergency stop (not wire-exposed)."""
        if self.state.phase is not FlightPhase.EMERGENCY_STOPPED:
            raise InvalidTransitionError("not emergency-stopped")
        phase = FlightPhase.HOVERING if self.alt_rel_m() > 0.05 else FlightPhase.GROUNDED
        self.state = replace(self.state, phase=phase)

    def set_mission_active(self, active: bool) -> None:
        self._mission_active = active
        phase = self.state.phase
        if active and phase in (FlightPhase.HOVERING, FlightPhase.MANUAL):
            self.state = replace(self.state, phase=FlightPhase.MISSION)
        elif not active and phase is FlightPhase.MISSION:
            self.state = replace(self.state, phase=FlightPhase.HOVERING)

    # -- integration ----------------------------------------------------------

    def step(self, manual_cmd: VelocityCommand, dt: float) -> VehicleState:
        """Advance one tick; ``manual_cmd`` applies in Hovering/Manual/Mission."""
        phase = self.state.phase
        cmd = manual_cmd

        if phase is FlightPhase.TAKING_OFF:
            err = self.params.takeoff_alt_rel_m - self.alt_rel_m()
            if err <= 0.05:
                self.state = replace(self.state, phase=FlightPhase.HOVERING)
                cmd = VelocityCommand.hold()
            else:
                climb = min(self.params.max_v_speed_mps, 2.0 * err)
                cmd = VelocityCommand(EnuVector(0.0, 0.0, climb))
        elif phase is FlightPhase.LANDING:
            try:
                ground = height_at(self.terrain, self.state.position)
            except TerrainOutOfBoundsError:
                ground = self.datum.terrain_height_m
            agl = self.state.position.altitude_m - ground
            descend = -min(self.params.max_v_speed_mps, max(0.3, 1.0 * agl))
            cmd = VelocityCommand(EnuVector(0.0, 0.0, descend))
        elif phase is FlightPhase.RETURNING_HOME:
            cmd = self._return_home_command()
        elif phase in (FlightPhase.HOVERING, FlightPhase.MANUAL):
            new_phase = FlightPhase.HOVERING if manual_cmd.is_motionless() else FlightPhase.MANUAL
            if new_phase is not phase:
                self.state = replace(self.state, phase=new_phase)

        self.state = step(self.state, cmd, dt, self.params, self.terrain)
        gps = self.gps_schedule.level_at(self.state.time_s)
        if gps != self.state.gps_level:
            self.state = replace(self.state, gps_level=gps)
        return self.state

    def _return_home_command(self) -> VelocityCommand:
        ref = GeoReference(self.home)
        here = geodetic_to_enu(self.state.position, ref)
        dist = math.hypot(here.east_m, here.north_m)
        if dist <= self._HOME_ARRIVAL_M:
            self.state = replace(self.state, phase=FlightPhase.LANDING)
            agl = self.state.position.altitude_m - self.datum.terrain_height_m
            return VelocityCommand(EnuVector(0.0, 0.0, -min(self.params.max_v_speed_mps,
                                                            max(0.3, agl))))
        speed = min(self.params.max_h_speed_mps,
                    max(0.3, self._RTH_APPROACH_GAIN * dist))
        k = -speed / dist
        return VelocityCommand(EnuVector(here.east_m * k, here.north_m * k, 0.0))
