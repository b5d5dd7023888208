"""WGS84 geodetic, Earth-centered Earth-fixed, and local East-North-Up transforms.

Angles are decimal degrees at every public boundary; radians are used only
internally. Altitudes are meters above the WGS84 ellipsoid unless a value is
explicitly takeoff-relative (see :class:`TakeoffDatum`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# WGS84 ellipsoid
WGS84_A = 6378137.0                  # semi-major axis, m
WGS84_F = 1.0 / 298.257223563        # flattening
WGS84_B = WGS84_A * (1.0 - WGS84_F)  # semi-minor axis, m
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)  # first eccentricity squared

_LAT_TOL_RAD = 1e-13
_MAX_ITERATIONS = 20


class ConvergenceError(ArithmeticError):
    """Iterative geodetic latitude recovery did not converge."""


def normalize_lon_deg(lon_deg: float) -> float:
    """Wrap a longitude into [-180, 180)."""
    if -180.0 <= lon_deg < 180.0:
        return lon_deg  # keep in-range values bit-exact
    return (lon_deg + 180.0) % 360.0 - 180.0


def normalize_angle_deg(angle_deg: float) -> float:
    """Wrap an angle into [0, 360)."""
    if 0.0 <= angle_deg < 360.0:
        return angle_deg
    return angle_deg % 360.0


def wrap_angle_180(angle_deg: float) -> float:
    """Wrap an angle difference into [-180, 180)."""
    return (angle_deg + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class GeodeticPosition:
    """A WGS84 position: latitude/longitude in degrees, ellipsoidal height in m."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self) -> None:
        if not (-90.0 <= self.latitude_deg <= 90.0):
            raise ValueError(f"latitude out of range [-90, 90]: {self.latitude_deg}")
        if not (math.isfinite(self.longitude_deg) and math.isfinite(self.altitude_m)):
            raise ValueError("longitude and altitude must be finite")
        object.__setattr__(self, "longitude_deg", normalize_lon_deg(self.longitude_deg))


@dataclass(frozen=True)
class EcefVector:
    """Meters in the Earth-centered Earth-fixed frame."""

    x_m: float
    y_m: float
    z_m: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.x_m, self.y_m, self.z_m))):
            raise ValueError("ECEF components must be finite")


@dataclass(frozen=True)
class EnuVector:
    """Meters (or m/s, for velocities) in a local East-North-Up tangent frame."""

    east_m: float
    north_m: float
    up_m: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.east_m, self.north_m, self.up_m))):
            raise ValueError("ENU components must be finite")

    def __add__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m + other.east_m,
                         self.north_m + other.north_m,
                         self.up_m + other.up_m)

    def __sub__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m - other.east_m,
                         self.north_m - other.north_m,
                         self.up_m - other.up_m)

    def scaled(self, k: float) -> "EnuVector":
        return EnuVector(self.east_m * k, self.north_m * k, self.up_m * k)

    def norm(self) -> float:
        return math.sqrt(self.east_m ** 2 + self.north_m ** 2 + self.up_m ** 2)

    def horizontal_norm(self) -> float:
        return math.hypot(self.east_m, self.north_m)


ENU_ZERO = EnuVector(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GeoReference:
    """A local tangent frame: fixed origin plus the cached ECEF->ENU rotation."""

    origin: GeodeticPosition
    rotation: tuple[tuple[float, float, float], ...] = field(init=False, repr=False)
    origin_ecef: EcefVector = field(init=False, repr=False)

    def __post_init__(self) -> None:
        lat = math.radians(self.origin.latitude_deg)
        lon = math.radians(self.origin.longitude_deg)
        sp, cp = math.sin(lat), math.cos(lat)
        sl, cl = math.sin(lon), math.cos(lon)
        rot = (
            (-sl, cl, 0.0),
            (-sp * cl, -sp * sl, cp),
            (cp * cl, cp * sl, sp),
        )
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "origin_ecef", geodetic_to_ecef(self.origin))


@dataclass(frozen=True)
class TakeoffDatum:
    """Altitude datum captured at takeoff: the UAV reports heights above this."""

    takeoff_position: GeodeticPosition
    terrain_height_m: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.terrain_height_m):
            raise ValueError("terrain height must be finite")


def geodetic_to_ecef(p: GeodeticPosition) -> EcefVector:
    """Closed-form WGS84 geodetic to ECEF transform."""
    lat = math.radians(p.latitude_deg)
    lon = math.radians(p.longitude_deg)
    s, c = math.sin(lat), math.cos(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * s * s)
    return EcefVector(
        (n + p.altitude_m) * c * math.cos(lon),
        (n + p.altitude_m) * c * math.sin(lon),
        (n * (1.0 - WGS84_E2) + p.altitude_m) * s,
    )


def ecef_to_geodetic(v: EcefVector) -> GeodeticPosition:
    """Invert :func:`geodetic_to_ecef` by iterative latitude refinement.

    Raises :class:`ConvergenceError` if the latitude update has not fallen
    below tolerance after 20 iterations, and ``ValueError`` for the zero
    vector (latitude is undefined there).
    """
    x, y, z = v.x_m, v.y_m, v.z_m
    p = math.hypot(x, y)
    if p == 0.0 and z == 0.0:
        raise ValueError("geodetic coordinates undefined at the Earth's center")
    lon = math.atan2(y, x)
    lat = math.atan2(z, p * (1.0 - WGS84_E2))
    for _ in range(_MAX_ITERATIONS):
        s = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * s * s)
        alt = p * math.cos(lat) + z * s - WGS84_A * math.sqrt(1.0 - WGS84_E2 * s * s)
        new_lat = math.atan2(z, p * (1.0 - WGS84_E2 * n / (n + alt)))
        delta, lat = abs(new_lat - lat), new_lat
        if delta < _LAT_TOL_RAD:
            break
    else:
        raise ConvergenceError(f"latitude refinement did not converge for {v}")
    s = math.sin(lat)
    alt = p * math.cos(lat) + z * s - WGS84_A * math.sqrt(1.0 - WGS84_E2 * s * s)
    return GeodeticPosition(math.degrees(lat), math.degrees(lon), alt)


def geodetic_to_enu(p: GeodeticPosition, ref: GeoReference) -> EnuVector:
    """Position of ``p`` in the local East-North-Up frame anchored at ``ref``."""
    e = geodetic_to_ecef(p)
    dx = e.x_m - ref.origin_ecef.x_m
    dy = e.y_m - ref.origin_ecef.y_m
    dz = e.z_m - ref.origin_ecef.z_m
    r = ref.rotation
    return EnuVector(
        r[0][0] * dx + r[0][1] * dy + r[0][2] * dz,
        r[1][0] * dx + r[1][1] * dy + r[1][2] * dz,
        r[2][0] * dx + r[2][1] * dy + r[2][2] * dz,
    )


def enu_to_geodetic(v: EnuVector, ref: GeoReference) -> GeodeticPosition:
    """Inverse of :func:`geodetic_to_enu` (rotation transpose, then ECEF inverse)."""
    r = ref.rotation
    dx = r[0][0] * v.east_m + r[1][0] * v.north_m + r[2][0] * v.up_m
    dy = r[0][1] * v.east_m + r[1][1] * v.north_m + r[2][1] * v.up_m
    dz = r[0][2] * v.east_m + r[1][2] * v.north_m + r[2][2] * v.up_m
    return ecef_to_geodetic(EcefVector(ref.origin_ecef.x_m + dx,
                                       ref.origin_ecef.y_m + dy,
                                       ref.origin_ecef.z_m + dz))


def wgs84_alt_to_takeoff_rel(alt_wgs84_m: float, datum: TakeoffDatum) -> float:
    """Ellipsoidal altitude to height above the takeoff-point terrain."""
    return alt_wgs84_m - datum.terrain_height_m


def takeoff_rel_to_wgs84(alt_rel_m: float, datum: TakeoffDatum) -> float:
    """Height above the takeoff-point terrain to ellipsoidal altitude."""
    return alt_rel_m + datum.terrain_height_m


def ground_distance(a: EnuVector, b: EnuVector) -> float:
    """Horizontal distance between two local-frame points, ignoring up."""
    return math.hypot(b.east_m - a.east_m, b.north_m - a.north_m)
