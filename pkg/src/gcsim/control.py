"""Virtual-ball teleoperation mapping.

A big sphere with a rest position supplies a normalized 3-DoF displacement
(interface frame: x = right, y = up, z = forward); a small companion arc
supplies yaw and camera-pitch inputs. The mapping turns widget state into a
world-frame velocity command under one of two alignments:

* drone-centric: the interface forward axis tracks the vehicle's nose,
* user-centric: the interface forward axis tracks the operator's heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .geodesy import EnuVector, GeodeticPosition, normalize_angle_deg
from .vehicle import VehicleParams, VelocityCommand


class ControlFrame(Enum):
    DRONE_CENTRIC = 0
    USER_CENTRIC = 1


@dataclass(frozen=True)
class BallState:
    """Big-sphere displacement, normalized so the bounding sphere has radius 1."""

    x: float  # right
    y: float  # up
    z: float  # forward
    engaged: bool = True

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.x, self.y, self.z))):
            raise ValueError("ball displacement must be finite")
        if self.magnitude() > 1.0 + 1e-9:
            raise ValueError("ball displacement outside the unit sphere")
        if not self.engaged and self.magnitude() != 0.0:
            raise ValueError("disengaged ball must be at rest")

    def magnitude(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


BALL_REST = BallState(0.0, 0.0, 0.0, engaged=False)


@dataclass(frozen=True)
class ArcState:
    """Small-sphere inputs: signed positions along the yaw and pitch arcs."""

    yaw_input: float
    pitch_input: float
    engaged: bool = True

    def __post_init__(self) -> None:
        if not (-1.0 <= self.yaw_input <= 1.0 and -1.0 <= self.pitch_input <= 1.0):
            raise ValueError("arc inputs must lie in [-1, 1]")
        if not self.engaged and (self.yaw_input != 0.0 or self.pitch_input != 0.0):
            raise ValueError("disengaged arc must be at rest")


ARC_REST = ArcState(0.0, 0.0, engaged=False)


@dataclass(frozen=True)
class UserPose:
    """Operator position and compass heading (the interface frame anchor)."""

    position: GeodeticPosition
    heading_deg: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.heading_deg):
            raise ValueError("heading must be finite")
        object.__setattr__(self, "heading_deg", normalize_angle_deg(self.heading_deg))


@dataclass(frozen=True)
class ControlParams:
    deadzone: float = 0.1           # fraction of the sphere radius
    speed_curve: float = 1.0        # exponent on post-deadzone magnitude
    yaw_rate_gain_dps: float = 90.0  # deg/s at full arc deflection
    pitch_gain_deg: float = 90.0    # gimbal degrees at full arc deflection

    def __post_init__(self) -> None:
        if not (0.0 <= self.deadzone < 0.5):
            raise ValueError("deadzone must lie in [0, 0.5)")
        if self.speed_curve <= 0 or self.yaw_rate_gain_dps <= 0 or self.pitch_gain_deg <= 0:
            raise ValueError("gains must be positive")


def clamp_ball(x: float, y: float, z: float, engaged: bool = True) -> BallState:
    """Project a raw displacement radially onto the unit sphere if it escapes."""
    r = math.sqrt(x * x + y * y + z * z)
    if r > 1.0:
        x, y, z = x / r, y / r, z / r
    if not engaged:
        return BALL_REST
    return BallState(x, y, z, engaged=True)


def deflection(ball: BallState, params: ControlParams) -> float:
    """Post-deadzone displacement magnitude, in [0, 1]."""
    r = ball.magnitude()
    if not ball.engaged or r <= params.deadzone:
        return 0.0
    return min(1.0, (r - params.deadzone) / (1.0 - params.deadzone))


def feedback_level(ball: BallState, params: ControlParams) -> float:
    """Intensity for the interface's audio/visual push feedback."""
    return deflection(ball, params)


def ball_to_command(ball: BallState, arc: ArcState, frame: ControlFrame,
                    uav_yaw_deg: float, user: UserPose,
                    params: ControlParams, limits: VehicleParams) -> VelocityCommand:
    """Map widget state to a world-frame velocity command.

    The post-deadzone magnitude (shaped by the speed curve) scales per-axis
    maximum speeds along the displacement direction; the horizontal part is
    then rotated from the interface frame into ENU about the vertical axis by
    the frame's reference yaw. Arc inputs become a yaw rate and a gimbal
    pitch set-point. Every output respects the vehicle limits.
    """
    m = deflection(ball, params)
    if m > 0.0:
        r = ball.magnitude()
        scale = m ** params.speed_curve / r
        v_right = ball.x * scale * limits.max_h_speed_mps
        v_up = ball.y * scale * limits.max_v_speed_mps
        v_forward = ball.z * scale * limits.max_h_speed_mps
        ref_yaw = uav_yaw_deg if frame is ControlFrame.DRONE_CENTRIC else user.heading_deg
        a = math.radians(ref_yaw)
        sin_a, cos_a = math.sin(a), math.cos(a)
        v_east = v_right * cos_a + v_forward * sin_a
        v_north = -v_right * sin_a + v_forward * cos_a
        h = math.hypot(v_east, v_north)
        if h > limits.max_h_speed_mps:
            k = limits.max_h_speed_mps / h
            v_east, v_north = v_east * k, v_north * k
        v_up = max(-limits.max_v_speed_mps, min(limits.max_v_speed_mps, v_up))
        v_cmd = EnuVector(v_east, v_north, v_up)
    else:
        v_cmd = EnuVector(0.0, 0.0, 0.0)

    if arc.engaged:
        yaw_rate = arc.yaw_input * params.yaw_rate_gain_dps
        yaw_rate = max(-limits.max_yaw_rate_dps, min(limits.max_yaw_rate_dps, yaw_rate))
        gimbal_target = max(-90.0, min(0.0, arc.pitch_input * params.pitch_gain_deg))
    else:
        yaw_rate = 0.0
        gimbal_target = None  # hold

    return VelocityCommand(v_enu_cmd=v_cmd, yaw_rate_cmd_dps=yaw_rate,
                           gimbal_pitch_target_deg=gimbal_target)


def apply_safety_override(cmd: VelocityCommand, override_active: bool) -> VelocityCommand:
    """Gate widget commands: an active override forces the null command."""
    if override_active:
        return VelocityCommand.hold()
    return cmd
