"""The checked-in golden byte vectors are the conformance contract between
this codec and the browser client; both test suites pin the same file."""

import json
from pathlib import Path

import pytest

from gcsim.protocol import (
    Ack,
    ControlInput,
    MissionCommand,
    SafetyOverride,
    Telemetry,
    UserPoseMsg,
    VehicleCommand,
    WaypointUpload,
    decode,
    encode,
)

GOLDEN = Path(__file__).resolve().parent.parent / "frontend" / "golden" / "protocol_vectors.json"

TYPE_MAP = {
    "telemetry": Telemetry,
    "control_input": ControlInput,
    "waypoint_upload": WaypointUpload,
    "mission_command": MissionCommand,
    "vehicle_command": VehicleCommand,
    "safety_override": SafetyOverride,
    "user_pose": UserPoseMsg,
    "ack": Ack,
}


def load_vectors():
    return json.loads(GOLDEN.read_text())["vectors"]


def test_golden_file_exists_and_covers_every_type():
    vectors = load_vectors()
    assert {v["type"] for v in vectors} == set(TYPE_MAP)


@pytest.mark.parametrize("vector", load_vectors(), ids=lambda v: v["name"])
def test_golden_vector_decodes_and_reencodes(vector):
    data = bytes.fromhex(vector["hex"])
    message = decode(data)
    assert isinstance(message, TYPE_MAP[vector["type"]])
    assert encode(message) == data


def test_golden_file_matches_generator():
    import tools.make_golden_vectors as gen

    assert {"vectors": gen.vectors()} == json.loads(GOLDEN.read_text())
