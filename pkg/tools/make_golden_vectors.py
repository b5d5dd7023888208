#!/usr/bin/env python3
"""Regenerate frontend/golden/protocol_vectors.json from the primary codec.

The file pins byte-exact encodings of every message type so the TypeScript
client and the Python server can be checked against the same fixtures.
"""

from __future__ import annotations

import json
import struct
import sys
from pathlib import Path

from gcsim.control import ArcState, BallState, ControlFrame
from gcsim.geodesy import GeodeticPosition
from gcsim.mission import MissionAction, MissionState, Waypoint
from gcsim.protocol import (
    Ack,
    AckCode,
    ControlInput,
    MissionCommand,
    SafetyOverride,
    Telemetry,
    UserPoseMsg,
    VehicleAction,
    VehicleCommand,
    WaypointUpload,
    encode,
)
from gcsim.vehicle import FlightPhase


def f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


def vectors() -> list[dict]:
    out = []

    def add(name: str, kind: str, fields: dict, message) -> None:
        out.append({"name": name, "type": kind, "fields": fields,
                    "hex": encode(message).hex()})

    add("telemetry_cruise", "telemetry",
        {"seq": 421, "sim_time_ms": 73200, "lat": 51.0304494, "lon": 13.7307127,
         "alt_wgs84": 252.75, "alt_rel": f32(30.25), "v_east": f32(4.5),
         "v_north": f32(-1.25), "v_up": f32(0.5), "yaw": f32(271.5),
         "gimbal_pitch": f32(-35.5), "battery": 87, "gps": 5, "phase": 4,
         "mission_state": 2, "mission_index": 1},
        Telemetry(seq=421, sim_time_ms=73200, lat_deg=51.0304494,
                  lon_deg=13.7307127, alt_wgs84_m=252.75, alt_rel_m=f32(30.25),
                  v_east_mps=f32(4.5), v_north_mps=f32(-1.25), v_up_mps=f32(0.5),
                  yaw_deg=f32(271.5), gimbal_pitch_deg=f32(-35.5), battery_pct=87,
                  gps_level=5, phase=FlightPhase.MISSION,
                  mission_state=MissionState.RUNNING, mission_index=1))

    add("telemetry_grounded", "telemetry",
        {"seq": 0, "sim_time_ms": 100, "lat": 51.0301798, "lon": 13.7307127,
         "alt_wgs84": 222.625, "alt_rel": 0.0, "v_east": 0.0, "v_north": 0.0,
         "v_up": 0.0, "yaw": 0.0, "gimbal_pitch": 0.0, "battery": 100, "gps": 5,
         "phase": 0, "mission_state": 0, "mission_index": 0},
        Telemetry(seq=0, sim_time_ms=100, lat_deg=51.0301798, lon_deg=13.7307127,
                  alt_wgs84_m=222.625, alt_rel_m=0.0, v_east_mps=0.0,
                  v_north_mps=0.0, v_up_mps=0.0, yaw_deg=0.0, gimbal_pitch_deg=0.0,
                  battery_pct=100, gps_level=5, phase=FlightPhase.GROUNDED,
                  mission_state=MissionState.IDLE, mission_index=0))

    add("control_forward_user", "control_input",
        {"frame": 1, "ball": [0.0, 0.0, 1.0], "arc": [0.0, 0.0]},
        ControlInput(ControlFrame.USER_CENTRIC, BallState(0.0, 0.0, 1.0),
                     ArcState(0.0, 0.0, engaged=False)))

    add("control_diagonal_drone", "control_input",
        {"frame": 0, "ball": [0.5, 0.25, -0.5], "arc": [0.75, -0.5]},
        ControlInput(ControlFrame.DRONE_CENTRIC, BallState(0.5, 0.25, -0.5),
                     ArcState(0.75, -0.5)))

    add("control_release_zero", "control_input",
        {"frame": 1, "ball": [0.0, 0.0, 0.0], "arc": [0.0, 0.0]},
        ControlInput(ControlFrame.USER_CENTRIC,
                     BallState(0.0, 0.0, 0.0, engaged=False),
                     ArcState(0.0, 0.0, engaged=False)))

    add("waypoints_pair_camera", "waypoint_upload",
        {"waypoints": [
            {"lat": 51.0304494, "lon": 13.7307127, "alt_rel": f32(30.0),
             "heading": f32(0.0), "cam_pitch": f32(0.0), "camera": False},
            {"lat": 51.0317978, "lon": 13.7307128, "alt_rel": f32(80.0),
             "heading": f32(180.0), "cam_pitch": f32(-45.0), "camera": True},
        ]},
        WaypointUpload((
            Waypoint(position=GeodeticPosition(51.0304494, 13.7307127, f32(30.0)),
                     heading_deg=0.0, camera_pitch_deg=0.0),
            Waypoint(position=GeodeticPosition(51.0317978, 13.7307128, f32(80.0)),
                     heading_deg=180.0, camera_pitch_deg=-45.0,
                     is_camera_waypoint=True),
        )))

    for action in MissionAction:
        add(f"mission_{action.name.lower()}", "mission_command",
            {"action": action.value}, MissionCommand(action))
    for action in VehicleAction:
        add(f"vehicle_{action.name.lower()}", "vehicle_command",
            {"action": action.value}, VehicleCommand(action))

    add("override_on", "safety_override", {"active": True}, SafetyOverride(True))
    add("override_off", "safety_override", {"active": False}, SafetyOverride(False))

    add("user_pose_north", "user_pose",
        {"lat": 51.0301798, "lon": 13.7307127, "alt": 222.625, "heading": f32(0.0)},
        UserPoseMsg(51.0301798, 13.7307127, 222.625, 0.0))
    add("user_pose_rotated", "user_pose",
        {"lat": 51.0301798, "lon": 13.7307127, "alt": 222.625, "heading": f32(92.5)},
        UserPoseMsg(51.0301798, 13.7307127, 222.625, f32(92.5)))

    add("ack_ok", "ack", {"ref_tag": 5, "code": 0}, Ack(0x05, AckCode.OK))
    add("ack_validation_failed", "ack", {"ref_tag": 3, "code": 2},
        Ack(0x03, AckCode.VALIDATION_FAILED))

    return out


def main() -> int:
    target = Path(__file__).resolve().parent.parent / "frontend" / "golden"
    target.mkdir(parents=True, exist_ok=True)
    path = target / "protocol_vectors.json"
    path.write_text(json.dumps({"vectors": vectors()}, indent=2) + "\n")
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
