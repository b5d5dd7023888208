from __future__ import annotations

import pytest

from gcsim.control import ControlParams, UserPose
from gcsim.flightlog import ScoreConfig
from gcsim.geodesy import GeodeticPosition
from gcsim.scenario import Scenario
from gcsim.terrain import HeightField, synthetic_field
from gcsim.vehicle import GpsSchedule, VehicleParams

ORIGIN = GeodeticPosition(51.03, 13.73, 0.0)


@pytest.fixture
def flat_field() -> HeightField:
    """400 x 400 m constant-height pad at 215 m."""
    return synthetic_field(width_m=400.0, depth_m=400.0, slope_m=0.0, base_m=215.0,
                           cell_size_m=20.0, origin=ORIGIN)


@pytest.fixture
def ramp_field() -> HeightField:
    """100 x 250 m field climbing from 215 m to 310 m across its depth."""
    return synthetic_field(width_m=100.0, depth_m=250.0, slope_m=95.0, base_m=215.0,
                           cell_size_m=5.0, origin=ORIGIN)


def make_scenario(terrain: HeightField, *, user_xy: tuple[float, float] = (50.0, 50.0),
                  start_xy: tuple[float, float] | None = None,
                  user_heading: float = 0.0, vehicle_yaw: float = 0.0,
                  params: VehicleParams | None = None,
                  control: ControlParams | None = None,
                  speed_mps: float = 5.0, clearance_m: float = 5.0,
                  tick_hz: int = 50,
                  gps_schedule: GpsSchedule | None = None) -> Scenario:
    """Build a scenario with positions given in meters east/north of the
    terrain's southwest corner."""
    from gcsim.geodesy import EnuVector, GeoReference, enu_to_geodetic
    from gcsim.terrain import height_at

    anchor = GeoReference(GeodeticPosition(terrain.origin.latitude_deg,
                                           terrain.origin.longitude_deg, 0.0))

    def at(x: float, y: float) -> GeodeticPosition:
        p = enu_to_geodetic(EnuVector(x, y, 0.0), anchor)
        return GeodeticPosition(p.latitude_deg, p.longitude_deg, 0.0)

    user_pos = at(*user_xy)
    user_pos = GeodeticPosition(user_pos.latitude_deg, user_pos.longitude_deg,
                                height_at(terrain, user_pos))
    start = at(*(start_xy if start_xy is not None else user_xy))
    return Scenario(
        name="test", terrain=terrain,
        user=UserPose(position=user_pos, heading_deg=user_heading),
        vehicle_start=start, vehicle_yaw_deg=vehicle_yaw,
        vehicle_params=params or VehicleParams(),
        control_params=control or ControlParams(),
        score_config=ScoreConfig(),
        mission_speed_mps=speed_mps, mission_clearance_m=clearance_m,
        listen_host="127.0.0.1", listen_port=8765, tick_hz=tick_hz,
        gps_schedule=gps_schedule or GpsSchedule())
