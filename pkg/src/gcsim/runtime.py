"""The simulation actor: one session owns all mutable state, consumes commands
strictly in arrival order, advances the vehicle at the fixed tick rate, and
emits telemetry frames plus log records at 10 Hz.

Arbitration rules: a running mission ignores widget input entirely; the
safety override zeroes widget input; the emergency stop dominates everything
and aborts any active mission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import protocol
from .control import ARC_REST, BALL_REST, ControlFrame, UserPose, apply_safety_override, ball_to_command
from .flightlog import LogRecord
from .geodesy import GeodeticPosition, GeoReference, wgs84_alt_to_takeoff_rel
from .mission import (
    ACTIVE_MISSION_STATES,
    MissionAction,
    MissionPlan,
    MissionState,
    MissionStatus,
    executor_step,
    mission_control,
    validate_plan,
)
from .protocol import (
    Ack,
    AckCode,
    ControlInput,
    Message,
    MissionCommand,
    SafetyOverride,
    TelemetryScheduler,
    UserPoseMsg,
    VehicleAction,
    VehicleCommand,
    WaypointUpload,
    tag_of,
)
from .scenario import Scenario, Script
from .vehicle import FlightPhase, InvalidTransitionError, VehicleSim, VelocityCommand


class SimSession:
    """Single-writer simulation state machine; snapshots it hands out are
    immutable and safe to share."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.terrain = scenario.terrain
        self.georef = GeoReference(scenario.user.position)
        self.user_pose: UserPose = scenario.user
        self.vehicle = VehicleSim(scenario.vehicle_start, scenario.vehicle_params,
                                  scenario.terrain, yaw_deg=scenario.vehicle_yaw_deg,
                                  gps_schedule=scenario.gps_schedule)
        self.plan: MissionPlan | None = None
        self.mission = MissionStatus()
        self.ball = BALL_REST
        self.arc = ARC_REST
        self.control_frame = ControlFrame.USER_CENTRIC
        self.override_active = False
        self.scheduler = TelemetryScheduler()
        self.time_ms = 0
        self.records: list[LogRecord] = []
        self._photo_pending = False

    # -- command handling ------------------------------------------------------

    def handle_message(self, msg: Message) -> Ack | None:
        """Apply one inbound message; state-changing commands get an Ack."""
        if isinstance(msg, ControlInput):
            self.ball, self.arc = msg.ball, msg.arc
            self.control_frame = msg.frame
            return None
        if isinstance(msg, UserPoseMsg):
            self.user_pose = UserPose(
                position=GeodeticPosition(msg.lat_deg, msg.lon_deg, msg.alt_m),
                heading_deg=msg.heading_deg)
            return None
        if isinstance(msg, WaypointUpload):
            return self._handle_upload(msg)
        if isinstance(msg, MissionCommand):
            return self._handle_mission(msg)
        if isinstance(msg, VehicleCommand):
            return self._handle_vehicle(msg)
        if isinstance(msg, SafetyOverride):
            self.override_active = msg.active
            return Ack(tag_of(msg), AckCode.OK)
        return None  # inbound telemetry/acks are ignored

    def _handle_upload(self, msg: WaypointUpload) -> Ack:
        tag = tag_of(msg)
        if self.mission.state in (MissionState.RUNNING, MissionState.PAUSED):
            return Ack(tag, AckCode.INVALID_TRANSITION)
        try:
            plan = MissionPlan(waypoints=msg.waypoints,
                               takeoff_datum=self.vehicle.datum,
                               speed_mps=self.scenario.mission_speed_mps)
        except ValueError:
            return Ack(tag, AckCode.VALIDATION_FAILED)
        report = validate_plan(plan, self.terrain, self.scenario.mission_clearance_m)
        if not report.ok:
            return Ack(tag, AckCode.VALIDATION_FAILED)
        self.plan = plan
        self.mission = MissionStatus(MissionState.UPLOADED, 0, False)
        return Ack(tag, AckCode.OK)

    def _handle_mission(self, msg: MissionCommand) -> Ack:
        tag = tag_of(msg)
        try:
            new_status = mission_control(self.mission, msg.action)
        except InvalidTransitionError:
            return Ack(tag, AckCode.INVALID_TRANSITION)
        if msg.action is MissionAction.START and self.vehicle.state.phase is FlightPhase.GROUNDED:
            try:
                self.vehicle.request_takeoff()
            except InvalidTransitionError:
                return Ack(tag, AckCode.INVALID_TRANSITION)
        self.mission = new_status
        if new_status.state is not MissionState.RUNNING:
            self.vehicle.set_mission_active(False)
        return Ack(tag, AckCode.OK)

    def _handle_vehicle(self, msg: VehicleCommand) -> Ack:
        tag = tag_of(msg)
        try:
            if msg.action is VehicleAction.TAKEOFF:
                self.vehicle.request_takeoff()
            elif msg.action is VehicleAction.LAND:
                self._abort_active_mission()
                self.vehicle.request_land()
            elif msg.action is VehicleAction.RETURN_HOME:
                self._abort_active_mission()
                self.vehicle.request_return_home()
            else:
                self._abort_active_mission()
                self.vehicle.request_emergency_stop()
        except InvalidTransitionError:
            return Ack(tag, AckCode.INVALID_TRANSITION)
        return Ack(tag, AckCode.OK)

    def _abort_active_mission(self) -> None:
        if self.mission.state in (MissionState.RUNNING, MissionState.PAUSED):
            self.mission = replace(self.mission, state=MissionState.ABORTED)

    # -- simulation loop --------------------------------------------------------

    def tick(self) -> list[bytes]:
        """Advance one fixed step; returns the encoded telemetry frames due."""
        cmd = VelocityCommand.hold()
        vehicle_phase = self.vehicle.state.phase

        if self.mission.state is MissionState.RUNNING and self.plan is not None:
            if vehicle_phase in (FlightPhase.HOVERING, FlightPhase.MANUAL,
                                 FlightPhase.MISSION):
                self.vehicle.set_mission_active(True)
                prev_photo = self.mission.photo_taken
                cmd, self.mission = executor_step(self.mission, self.plan,
                                                  self.vehicle.state,
                                                  self.scenario.vehicle_params)
                if self.mission.photo_taken and not prev_photo:
                    self._photo_pending = True
                if self.mission.state is not MissionState.RUNNING:
                    self.vehicle.set_mission_active(False)
                    cmd = VelocityCommand.hold()
            # while taking off (or otherwise not yet steerable) the mission waits
        elif vehicle_phase in (FlightPhase.HOVERING, FlightPhase.MANUAL):
            cmd = ball_to_command(self.ball, self.arc, self.control_frame,
                                  self.vehicle.state.yaw_deg, self.user_pose,
                                  self.scenario.control_params,
                                  self.scenario.vehicle_params)
            cmd = apply_safety_override(cmd, self.override_active)

        state = self.vehicle.step(cmd, self.scenario.dt_s)
        self.time_ms += self.scenario.tick_ms

        if state.phase in (FlightPhase.CRASHED, FlightPhase.EMERGENCY_STOPPED):
            if self.mission.state in (MissionState.RUNNING, MissionState.PAUSED):
                self.mission = replace(self.mission, state=MissionState.ABORTED)
                self.vehicle.set_mission_active(False)

        frames: list[bytes] = []
        seq = self.scheduler.poll(self.time_ms)
        if seq is not None:
            self.records.append(self._make_record())
            frames.append(protocol.encode(self.make_telemetry(seq)))
        return frames

    # -- snapshots ---------------------------------------------------------------

    def alt_rel_m(self) -> float:
        return wgs84_alt_to_takeoff_rel(self.vehicle.state.position.altitude_m,
                                        self.vehicle.datum)

    def make_telemetry(self, seq: int) -> protocol.Telemetry:
        s = self.vehicle.state
        return protocol.Telemetry(
            seq=seq, sim_time_ms=self.time_ms,
            lat_deg=s.position.latitude_deg, lon_deg=s.position.longitude_deg,
            alt_wgs84_m=s.position.altitude_m, alt_rel_m=self.alt_rel_m(),
            v_east_mps=s.velocity_enu.east_m, v_north_mps=s.velocity_enu.north_m,
            v_up_mps=s.velocity_enu.up_m, yaw_deg=s.yaw_deg,
            gimbal_pitch_deg=s.gimbal_pitch_deg,
            battery_pct=int(round(s.battery_pct)), gps_level=s.gps_level,
            phase=s.phase, mission_state=self.mission.state,
            mission_index=min(self.mission.current_index, 0xFF))

    def _make_record(self) -> LogRecord:
        s = self.vehicle.state
        photo = self._photo_pending
        self._photo_pending = False
        return LogRecord(
            sim_time_ms=self.time_ms, position=s.position,
            alt_rel_m=self.alt_rel_m(), velocity_enu=s.velocity_enu,
            yaw_deg=s.yaw_deg, gimbal_pitch_deg=s.gimbal_pitch_deg,
            phase=s.phase, mission_index=self.mission.current_index,
            photo_event=photo)


@dataclass(frozen=True)
class ScriptResult:
    records: list[LogRecord]
    acks: list[tuple[float, Ack]]
    plan: MissionPlan | None

    @property
    def error_acks(self) -> list[tuple[float, Ack]]:
        return [(t, a) for t, a in self.acks if a.code is not AckCode.OK]


def run_script(scenario: Scenario, script: Script) -> ScriptResult:
    """Headless deterministic run: inject each scripted message at its sim
    time, advance to the script duration, and return the complete log.
    Rejected commands are recorded as error acks and the run continues."""
    session = SimSession(scenario)
    events = [(int(round(e.time_s * 1000)), e.message) for e in script.events]
    n_ticks = math.ceil(script.duration_s * 1000 / scenario.tick_ms)
    acks: list[tuple[float, Ack]] = []
    cursor = 0
    for _ in range(n_ticks):
        while cursor < len(events) and events[cursor][0] <= session.time_ms:
            ack = session.handle_message(events[cursor][1])
            if ack is not None:
                acks.append((session.time_ms / 1000.0, ack))
            cursor += 1
        session.tick()
    return ScriptResult(records=session.records, acks=acks, plan=session.plan)
