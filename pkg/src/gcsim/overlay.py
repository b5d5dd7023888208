"""Spatial-overlay geometry: leading lines, telemetry panel values, and the
planned-path polyline, computed as pure local-frame geometry for a client to
render."""

from __future__ import annotations

from dataclasses import dataclass

from .control import UserPose
from .geodesy import (
    EnuVector,
    GeodeticPosition,
    GeoReference,
    TakeoffDatum,
    geodetic_to_enu,
    ground_distance,
    takeoff_rel_to_wgs84,
    wgs84_alt_to_takeoff_rel,
)
from .mission import MissionPlan, preview_polyline
from .terrain import HeightField, TerrainOutOfBoundsError, height_at
from .vehicle import VehicleState

SCALE_MIN = 0.5
SCALE_MAX = 10.0


@dataclass(frozen=True)
class OverlaySnapshot:
    user_ground: EnuVector
    uav_ground: EnuVector
    uav_air: EnuVector
    ground_distance_m: float
    ground_speed_mps: float
    altitude_rel_m: float
    vertical_speed_mps: float
    gps_level: int
    battery_pct: float
    scale_factor: float
    uav_ground_estimated: bool  # true when the UAV left the terrain footprint

    @property
    def horizontal_line(self) -> tuple[EnuVector, EnuVector]:
        """From the user's feet to the point beneath the UAV."""
        return self.user_ground, self.uav_ground

    @property
    def vertical_line(self) -> tuple[EnuVector, EnuVector]:
        """From the ground straight up to the UAV."""
        return self.uav_ground, self.uav_air


def compute_overlay(user: UserPose, vehicle: VehicleState, terrain: HeightField,
                    ref: GeoReference, datum: TakeoffDatum,
                    adaptive_ref_dist_m: float | None = None) -> OverlaySnapshot:
    """Build one overlay snapshot from current poses.

    ``adaptive_ref_dist_m`` of ``None`` selects fixed scaling (factor 1);
    otherwise the factor grows linearly with ground distance, clamped to
    [0.5, 10].
    """
    uav_air = geodetic_to_enu(vehicle.position, ref)

    estimated = False
    try:
        ground_h = height_at(terrain, vehicle.position)
    except TerrainOutOfBoundsError:
        ground_h = datum.terrain_height_m
        estimated = True
    ground_pt = GeodeticPosition(vehicle.position.latitude_deg,
                                 vehicle.position.longitude_deg, ground_h)
    ground_up = geodetic_to_enu(ground_pt, ref).up_m
    uav_ground = EnuVector(uav_air.east_m, uav_air.north_m, ground_up)

    try:
        user_h = height_at(terrain, user.position)
    except TerrainOutOfBoundsError:
        user_h = user.position.altitude_m
    user_ground = geodetic_to_enu(
        GeodeticPosition(user.position.latitude_deg, user.position.longitude_deg,
                         user_h), ref)

    dist = ground_distance(user_ground, uav_air)
    if adaptive_ref_dist_m is None:
        scale = 1.0
    else:
        if adaptive_ref_dist_m <= 0:
            raise ValueError("adaptive reference distance must be positive")
        scale = min(SCALE_MAX, max(SCALE_MIN, dist / adaptive_ref_dist_m))

    return OverlaySnapshot(
        user_ground=user_ground,
        uav_ground=uav_ground,
        uav_air=uav_air,
        ground_distance_m=dist,
        ground_speed_mps=vehicle.velocity_enu.horizontal_norm(),
        altitude_rel_m=wgs84_alt_to_takeoff_rel(vehicle.position.altitude_m, datum),
        vertical_speed_mps=vehicle.velocity_enu.up_m,
        gps_level=vehicle.gps_level,
        battery_pct=vehicle.battery_pct,
        scale_factor=scale,
        uav_ground_estimated=estimated,
    )


def planned_path_overlay(plan: MissionPlan | None, ref: GeoReference,
                         datum: TakeoffDatum,
                         samples_per_segment: int = 0) -> list[EnuVector]:
    """Planned trajectory as an ENU polyline (empty when no active plan)."""
    if plan is None:
        return []
    out = []
    for p in preview_polyline(plan, samples_per_segment):
        wgs = GeodeticPosition(p.latitude_deg, p.longitude_deg,
                               takeoff_rel_to_wgs84(p.altitude_m, datum))
        out.append(geodetic_to_enu(wgs, ref))
    return out
