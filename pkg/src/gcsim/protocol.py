"""Compact binary message codec and channel-class contract.

Every message encodes to a little-endian byte string whose first byte is the
type tag. Telemetry rides a lossy low-latency channel at 10 Hz; everything
else rides a reliable ordered channel. One frame = one message.

Wire layouts (all little-endian, angles in degrees, IEEE 754 floats):

  0x01 Telemetry      tag u8 | seq u32 | sim_time_ms u64 | lat f64 | lon f64
                      | alt_wgs84 f64 | alt_rel f32 | v_east f32 | v_north f32
                      | v_up f32 | yaw f32 | gimbal_pitch f32 | battery u8
                      | gps u8 | phase u8 | mission_state u8 | mission_index u8
  0x02 ControlInput   tag u8 | frame u8 | ball_x f32 | ball_y f32 | ball_z f32
                      | arc_yaw f32 | arc_pitch f32
  0x03 WaypointUpload tag u8 | count u8 | count x { lat f64 | lon f64
                      | alt_rel f32 | heading f32 | cam_pitch f32 | flags u8 }
  0x04 MissionCommand tag u8 | action u8 (0 start, 1 pause, 2 resume, 3 abort)
  0x05 VehicleCommand tag u8 | action u8 (0 takeoff, 1 land, 2 return-home, 3 e-stop)
  0x06 SafetyOverride tag u8 | active u8
  0x07 UserPoseMsg    tag u8 | lat f64 | lon f64 | alt f64 | heading f32
  0x08 Ack            tag u8 | ref_tag u8 | code u8 (0 ok, 1 invalid-transition,
                      2 validation-failed, 3 out-of-range)
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum

from .control import ArcState, BallState, ControlFrame, clamp_ball
from .mission import MissionState, MissionAction, Waypoint
from .vehicle import FlightPhase
from .geodesy import GeodeticPosition

TAG_TELEMETRY = 0x01
TAG_CONTROL_INPUT = 0x02
TAG_WAYPOINT_UPLOAD = 0x03
TAG_MISSION_COMMAND = 0x04
TAG_VEHICLE_COMMAND = 0x05
TAG_SAFETY_OVERRIDE = 0x06
TAG_USER_POSE = 0x07
TAG_ACK = 0x08

_KNOWN_TAGS = frozenset(range(TAG_TELEMETRY, TAG_ACK + 1))


class ProtocolError(ValueError):
    pass


class EncodeError(ProtocolError):
    """Message fields violate their wire-domain invariants."""


class DecodeError(ProtocolError):
    pass


class UnknownTypeError(DecodeError):
    pass


class TruncatedError(DecodeError):
    pass


class TrailingBytesError(DecodeError):
    pass


class FieldRangeError(DecodeError):
    pass


class ChannelClass(Enum):
    RELIABLE_ORDERED = "reliable-ordered"
    LOSSY_LOW_LATENCY = "lossy-low-latency"


class VehicleAction(Enum):
    TAKEOFF = 0
    LAND = 1
    RETURN_HOME = 2
    EMERGENCY_STOP = 3


class AckCode(Enum):
    OK = 0
    INVALID_TRANSITION = 1
    VALIDATION_FAILED = 2
    OUT_OF_RANGE = 3


@dataclass(frozen=True)
class Telemetry:
    seq: int
    sim_time_ms: int
    lat_deg: float
    lon_deg: float
    alt_wgs84_m: float
    alt_rel_m: float
    v_east_mps: float
    v_north_mps: float
    v_up_mps: float
    yaw_deg: float
    gimbal_pitch_deg: float
    battery_pct: int
    gps_level: int
    phase: FlightPhase
    mission_state: MissionState
    mission_index: int


@dataclass(frozen=True)
class ControlInput:
    frame: ControlFrame
    ball: BallState
    arc: ArcState


@dataclass(frozen=True)
class WaypointUpload:
    waypoints: tuple[Waypoint, ...]


@dataclass(frozen=True)
class MissionCommand:
    action: MissionAction


@dataclass(frozen=True)
class VehicleCommand:
    action: VehicleAction


@dataclass(frozen=True)
class SafetyOverride:
    active: bool


@dataclass(frozen=True)
class UserPoseMsg:
    lat_deg: float
    lon_deg: float
    alt_m: float
    heading_deg: float


@dataclass(frozen=True)
class Ack:
    ref_tag: int
    code: AckCode


Message = (Telemetry | ControlInput | WaypointUpload | MissionCommand
           | VehicleCommand | SafetyOverride | UserPoseMsg | Ack)

_TELEMETRY = struct.Struct("<BIQdddffffffBBBBB")
_CONTROL = struct.Struct("<BBfffff")
_WP_HEADER = struct.Struct("<BB")
_WP_ENTRY = struct.Struct("<ddfffB")
_PAIR = struct.Struct("<BB")
_USER_POSE = struct.Struct("<Bdddf")
_ACK = struct.Struct("<BBB")

WIRE_SIZES = {
    TAG_TELEMETRY: _TELEMETRY.size,
    TAG_CONTROL_INPUT: _CONTROL.size,
    TAG_MISSION_COMMAND: _PAIR.size,
    TAG_VEHICLE_COMMAND: _PAIR.size,
    TAG_SAFETY_OVERRIDE: _PAIR.size,
    TAG_USER_POSE: _USER_POSE.size,
    TAG_ACK: _ACK.size,
}
WAYPOINT_ENTRY_SIZE = _WP_ENTRY.size


def waypoint_upload_size(count: int) -> int:
    return _WP_HEADER.size + WAYPOINT_ENTRY_SIZE * count


def _require(cond: bool, message: str, err: type[ProtocolError]) -> None:
    if not cond:
        raise err(message)


def _check_latlon(lat: float, lon: float, err: type[ProtocolError]) -> None:
    _require(math.isfinite(lat) and -90.0 <= lat <= 90.0,
             f"latitude out of range: {lat}", err)
    _require(math.isfinite(lon) and -180.0 <= lon < 180.0,
             f"longitude out of range: {lon}", err)


def _check_finite(err: type[ProtocolError], **values: float) -> None:
    for name, value in values.items():
        _require(math.isfinite(value), f"{name} must be finite", err)


def _wrap_heading(h: float, err: type[ProtocolError]) -> float:
    _require(math.isfinite(h) and 0.0 <= h <= 360.0, f"heading out of range: {h}", err)
    return 0.0 if h == 360.0 else h


def encode(m: Message) -> bytes:
    """Serialize a message; raises :class:`EncodeError` when a field is
    outside its wire domain (malformed bytes are never emitted)."""
    if isinstance(m, Telemetry):
        _require(0 <= m.seq <= 0xFFFFFFFF, "seq out of u32 range", EncodeError)
        _require(0 <= m.sim_time_ms <= 0xFFFFFFFFFFFFFFFF, "time out of u64 range",
                 EncodeError)
        _check_latlon(m.lat_deg, m.lon_deg, EncodeError)
        _check_finite(EncodeError, alt_wgs84=m.alt_wgs84_m, alt_rel=m.alt_rel_m,
                      v_east=m.v_east_mps, v_north=m.v_north_mps, v_up=m.v_up_mps)
        yaw = _wrap_heading(m.yaw_deg, EncodeError)
        _require(-90.0 <= m.gimbal_pitch_deg <= 0.0, "gimbal pitch out of range",
                 EncodeError)
        _require(0 <= m.battery_pct <= 100, "battery out of range", EncodeError)
        _require(0 <= m.gps_level <= 5, "gps level out of range", EncodeError)
        _require(0 <= m.mission_index <= 0xFF, "mission index out of u8 range",
                 EncodeError)
        return _TELEMETRY.pack(TAG_TELEMETRY, m.seq, m.sim_time_ms, m.lat_deg,
                               m.lon_deg, m.alt_wgs84_m, m.alt_rel_m, m.v_east_mps,
                               m.v_north_mps, m.v_up_mps, yaw, m.gimbal_pitch_deg,
                               m.battery_pct, m.gps_level, m.phase.value,
                               m.mission_state.value, m.mission_index)
    if isinstance(m, ControlInput):
        return _CONTROL.pack(TAG_CONTROL_INPUT, m.frame.value, m.ball.x, m.ball.y,
                             m.ball.z, m.arc.yaw_input, m.arc.pitch_input)
    if isinstance(m, WaypointUpload):
        _require(1 <= len(m.waypoints) <= 99, "waypoint count must lie in 1..99",
                 EncodeError)
        parts = [_WP_HEADER.pack(TAG_WAYPOINT_UPLOAD, len(m.waypoints))]
        for wp in m.waypoints:
            _check_latlon(wp.position.latitude_deg, wp.position.longitude_deg,
                          EncodeError)
            _require(wp.alt_rel_m >= 0 and math.isfinite(wp.alt_rel_m),
                     "waypoint altitude must be >= 0", EncodeError)
            heading = _wrap_heading(wp.heading_deg, EncodeError)
            parts.append(_WP_ENTRY.pack(wp.position.latitude_deg,
                                        wp.position.longitude_deg, wp.alt_rel_m,
                                        heading, wp.camera_pitch_deg,
                                        1 if wp.is_camera_waypoint else 0))
        return b"".join(parts)
    if isinstance(m, MissionCommand):
        return _PAIR.pack(TAG_MISSION_COMMAND, m.action.value)
    if isinstance(m, VehicleCommand):
        return _PAIR.pack(TAG_VEHICLE_COMMAND, m.action.value)
    if isinstance(m, SafetyOverride):
        return _PAIR.pack(TAG_SAFETY_OVERRIDE, 1 if m.active else 0)
    if isinstance(m, UserPoseMsg):
        _check_latlon(m.lat_deg, m.lon_deg, EncodeError)
        _check_finite(EncodeError, alt=m.alt_m)
        heading = _wrap_heading(m.heading_deg, EncodeError)
        return _USER_POSE.pack(TAG_USER_POSE, m.lat_deg, m.lon_deg, m.alt_m, heading)
    if isinstance(m, Ack):
        _require(m.ref_tag in _KNOWN_TAGS, "ack references an unknown tag", EncodeError)
        return _ACK.pack(TAG_ACK, m.ref_tag, m.code.value)
    raise EncodeError(f"not a protocol message: {type(m).__name__}")


def decode(data: bytes) -> Message:
    """Parse one frame. Total over arbitrary input: returns a message or
    raises a :class:`DecodeError` subclass, never anything else."""
    if len(data) == 0:
        raise TruncatedError("empty frame")
    tag = data[0]
    if tag not in _KNOWN_TAGS:
        raise UnknownTypeError(f"unknown message tag 0x{tag:02x}")

    if tag == TAG_WAYPOINT_UPLOAD:
        if len(data) < _WP_HEADER.size:
            raise TruncatedError("waypoint upload shorter than its header")
        count = data[1]
        if not (1 <= count <= 99):
            raise FieldRangeError(f"waypoint count out of range: {count}")
        expected = waypoint_upload_size(count)
        _check_frame_length(len(data), expected)
        waypoints = []
        camera_seen = False
        for i in range(count):
            off = _WP_HEADER.size + i * WAYPOINT_ENTRY_SIZE
            lat, lon, alt_rel, heading, cam_pitch, flags = _WP_ENTRY.unpack_from(data, off)
            _check_latlon(lat, lon, FieldRangeError)
            _require(math.isfinite(alt_rel) and alt_rel >= 0.0,
                     f"waypoint {i} altitude out of range", FieldRangeError)
            heading = _wrap_heading(heading, FieldRangeError)
            _require(math.isfinite(cam_pitch) and -90.0 <= cam_pitch <= 0.0,
                     f"waypoint {i} camera pitch out of range", FieldRangeError)
            _require(flags in (0, 1), f"waypoint {i} has reserved flag bits set",
                     FieldRangeError)
            if flags == 1:
                _require(not camera_seen, "multiple camera waypoints", FieldRangeError)
                camera_seen = True
            waypoints.append(Waypoint(position=GeodeticPosition(lat, lon, alt_rel),
                                      heading_deg=heading, camera_pitch_deg=cam_pitch,
                                      is_camera_waypoint=flags == 1))
        return WaypointUpload(tuple(waypoints))

    _check_frame_length(len(data), WIRE_SIZES[tag])

    if tag == TAG_TELEMETRY:
        (_, seq, time_ms, lat, lon, alt, alt_rel, ve, vn, vu, yaw, gimbal,
         battery, gps, phase, mstate, midx) = _TELEMETRY.unpack(data)
        _check_latlon(lat, lon, FieldRangeError)
        _check_finite(FieldRangeError, alt_wgs84=alt, alt_rel=alt_rel,
                      v_east=ve, v_north=vn, v_up=vu)
        yaw = _wrap_heading(yaw, FieldRangeError)
        _require(math.isfinite(gimbal) and -90.0 <= gimbal <= 0.0,
                 "gimbal pitch out of range", FieldRangeError)
        _require(battery <= 100, f"battery out of range: {battery}", FieldRangeError)
        _require(gps <= 5, f"gps level out of range: {gps}", FieldRangeError)
        _require(phase <= 8, f"unknown flight phase: {phase}", FieldRangeError)
        _require(mstate <= 5, f"unknown mission state: {mstate}", FieldRangeError)
        return Telemetry(seq, time_ms, lat, lon, alt, alt_rel, ve, vn, vu, yaw,
                         gimbal, battery, gps, FlightPhase(phase),
                         MissionState(mstate), midx)
    if tag == TAG_CONTROL_INPUT:
        _, frame, bx, by, bz, arc_yaw, arc_pitch = _CONTROL.unpack(data)
        _require(frame in (0, 1), f"unknown control frame: {frame}", FieldRangeError)
        _check_finite(FieldRangeError, ball_x=bx, ball_y=by, ball_z=bz)
        r = math.sqrt(bx * bx + by * by + bz * bz)
        _require(r <= 1.0 + 1e-3, "ball displacement outside the unit sphere",
                 FieldRangeError)
        for name, v in (("arc_yaw", arc_yaw), ("arc_pitch", arc_pitch)):
            _require(math.isfinite(v) and -1.0 <= v <= 1.0,
                     f"{name} out of range: {v}", FieldRangeError)
        ball = clamp_ball(bx, by, bz, engaged=r > 0.0)
        arc = ArcState(arc_yaw, arc_pitch,
                       engaged=not (arc_yaw == 0.0 and arc_pitch == 0.0))
        return ControlInput(ControlFrame(frame), ball, arc)
    if tag == TAG_MISSION_COMMAND:
        _, action = _PAIR.unpack(data)
        _require(action <= 3, f"unknown mission action: {action}", FieldRangeError)
        return MissionCommand(MissionAction(action))
    if tag == TAG_VEHICLE_COMMAND:
        _, action = _PAIR.unpack(data)
        _require(action <= 3, f"unknown vehicle action: {action}", FieldRangeError)
        return VehicleCommand(VehicleAction(action))
    if tag == TAG_SAFETY_OVERRIDE:
        _, active = _PAIR.unpack(data)
        _require(active in (0, 1), f"override flag must be 0/1: {active}",
                 FieldRangeError)
        return SafetyOverride(active == 1)
    if tag == TAG_USER_POSE:
        _, lat, lon, alt, heading = _USER_POSE.unpack(data)
        _check_latlon(lat, lon, FieldRangeError)
        _check_finite(FieldRangeError, alt=alt)
        heading = _wrap_heading(heading, FieldRangeError)
        return UserPoseMsg(lat, lon, alt, heading)
    # TAG_ACK
    _, ref_tag, code = _ACK.unpack(data)
    _require(ref_tag in _KNOWN_TAGS, f"ack references unknown tag 0x{ref_tag:02x}",
             FieldRangeError)
    _require(code <= 3, f"unknown ack code: {code}", FieldRangeError)
    return Ack(ref_tag, AckCode(code))


def _check_frame_length(actual: int, expected: int) -> None:
    if actual < expected:
        raise TruncatedError(f"frame is {actual} bytes, expected {expected}")
    if actual > expected:
        raise TrailingBytesError(
            f"{actual - expected} trailing bytes after a {expected}-byte frame")


def tag_of(m: Message) -> int:
    return {
        Telemetry: TAG_TELEMETRY,
        ControlInput: TAG_CONTROL_INPUT,
        WaypointUpload: TAG_WAYPOINT_UPLOAD,
        MissionCommand: TAG_MISSION_COMMAND,
        VehicleCommand: TAG_VEHICLE_COMMAND,
        SafetyOverride: TAG_SAFETY_OVERRIDE,
        UserPoseMsg: TAG_USER_POSE,
        Ack: TAG_ACK,
    }[type(m)]


def channel_of(m: Message) -> ChannelClass:
    """Telemetry tolerates loss and rides the low-latency channel; every
    command type requires reliable in-order delivery."""
    if isinstance(m, Telemetry):
        return ChannelClass.LOSSY_LOW_LATENCY
    if isinstance(m, (ControlInput, WaypointUpload, MissionCommand, VehicleCommand,
                      SafetyOverride, UserPoseMsg, Ack)):
        return ChannelClass.RELIABLE_ORDERED
    raise ProtocolError(f"not a protocol message: {type(m).__name__}")


class TelemetryScheduler:
    """Emits one telemetry frame per 100 ms of simulation time with a
    strictly increasing sequence number."""

    PERIOD_MS = 100

    def __init__(self) -> None:
        self._next_due_ms = self.PERIOD_MS
        self._seq = 0

    def poll(self, sim_time_ms: int) -> int | None:
        """Returns the next sequence number when a frame is due, else None."""
        if sim_time_ms < self._next_due_ms:
            return None
        self._next_due_ms += self.PERIOD_MS
        seq = self._seq
        self._seq += 1
        return seq
