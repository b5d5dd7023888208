"""Flight-log recording, CSV round-trip, trajectory scoring, and path analytics.

The performance score combines a per-waypoint closest-distance score with a
cohort-normalized completion-time term and a binary photo indicator; the
time and photo terms only count when the final waypoint was approached
closer than the pass threshold.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .geodesy import (
    EnuVector,
    GeodeticPosition,
    GeoReference,
    geodetic_to_enu,
    takeoff_rel_to_wgs84,
    wrap_angle_180,
)
from .mission import MissionPlan
from .vehicle import FlightPhase

LOG_HEADER = ("time_ms,lat,lon,alt_wgs84,alt_rel,v_e,v_n,v_u,yaw,gimbal_pitch,"
              "phase,mission_index,photo")
LOG_FILE_SUFFIX = ".iglog.csv"


class LogParseError(ValueError):
    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class LogRecord:
    sim_time_ms: int
    position: GeodeticPosition      # altitude_m is WGS84
    alt_rel_m: float
    velocity_enu: EnuVector
    yaw_deg: float
    gimbal_pitch_deg: float
    phase: FlightPhase
    mission_index: int
    photo_event: bool = False


def write_log(records: list[LogRecord]) -> str:
    """Serialize time-ordered records to CSV; floats carry 9 significant digits."""
    out = io.StringIO()
    out.write(LOG_HEADER + "\n")
    last_t = -1
    for r in records:
        if r.sim_time_ms <= last_t:
            raise ValueError(f"records out of order at t={r.sim_time_ms} ms")
        last_t = r.sim_time_ms
        out.write(
            f"{r.sim_time_ms},{r.position.latitude_deg:.9g},"
            f"{r.position.longitude_deg:.9g},{r.position.altitude_m:.9g},"
            f"{r.alt_rel_m:.9g},{r.velocity_enu.east_m:.9g},"
            f"{r.velocity_enu.north_m:.9g},{r.velocity_enu.up_m:.9g},"
            f"{r.yaw_deg:.9g},{r.gimbal_pitch_deg:.9g},{r.phase.name},"
            f"{r.mission_index},{1 if r.photo_event else 0}\n")
    return out.getvalue()


def read_log(text: str) -> list[LogRecord]:
    """Exact inverse of :func:`write_log`; malformed or out-of-order rows raise
    :class:`LogParseError` with the offending row number."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != LOG_HEADER:
        raise LogParseError("missing or wrong header", 1)
    records: list[LogRecord] = []
    last_t = -1
    for row_no, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 13:
            raise LogParseError(f"expected 13 fields, got {len(fields)}", row_no)
        try:
            t = int(fields[0])
            lat, lon, alt, alt_rel, ve, vn, vu, yaw, gimbal = map(float, fields[1:10])
            phase = FlightPhase[fields[10]]
            mission_index = int(fields[11])
            photo = {"0": False, "1": True}[fields[12]]
        except (ValueError, KeyError) as exc:
            raise LogParseError(f"bad field: {exc}", row_no) from None
        if t <= last_t:
            raise LogParseError(f"time {t} ms not after previous {last_t} ms", row_no)
        last_t = t
        records.append(LogRecord(
            sim_time_ms=t,
            position=GeodeticPosition(lat, lon, alt),
            alt_rel_m=alt_rel,
            velocity_enu=EnuVector(ve, vn, vu),
            yaw_deg=yaw, gimbal_pitch_deg=gimbal, phase=phase,
            mission_index=mission_index, photo_event=photo))
    return records


@dataclass(frozen=True)
class ScoreConfig:
    delta_m: float = 10.0   # final-waypoint pass threshold
    d_max_m: float = 50.0   # distance-score normalization

    def __post_init__(self) -> None:
        if not (0.0 < self.delta_m <= self.d_max_m):
            raise ValueError("need 0 < delta_m <= d_max_m")


@dataclass(frozen=True)
class ScoreReport:
    per_waypoint_distance_m: tuple[float, ...]
    d_bar: float
    final_distance_m: float
    t_s: float
    t_min_s: float
    t_max_s: float
    photo: int
    gate_passed: bool
    score: float


def log_enu_positions(records: list[LogRecord], ref: GeoReference) -> np.ndarray:
    pts = np.empty((len(records), 3))
    for i, r in enumerate(records):
        enu = geodetic_to_enu(r.position, ref)
        pts[i] = (enu.east_m, enu.north_m, enu.up_m)
    return pts


def waypoint_enu_positions(plan: MissionPlan, ref: GeoReference) -> np.ndarray:
    datum = plan.takeoff_datum
    pts = np.empty((len(plan.waypoints), 3))
    for i, wp in enumerate(plan.waypoints):
        pos = GeodeticPosition(wp.position.latitude_deg, wp.position.longitude_deg,
                               takeoff_rel_to_wgs84(wp.alt_rel_m, datum))
        enu = geodetic_to_enu(pos, ref)
        pts[i] = (enu.east_m, enu.north_m, enu.up_m)
    return pts


def closest_distances(records: list[LogRecord], plan: MissionPlan) -> list[float]:
    """Minimum 3D distance from the flown trajectory samples to each waypoint,
    both expressed in the ENU frame anchored at the plan's takeoff point."""
    if not records:
        raise ValueError("empty log")
    ref = GeoReference(plan.takeoff_datum.takeoff_position)
    samples = log_enu_positions(records, ref)
    targets = waypoint_enu_positions(plan, ref)
    dists = np.linalg.norm(samples[None, :, :] - targets[:, None, :], axis=2)
    return [float(d) for d in dists.min(axis=1)]


def log_duration_s(records: list[LogRecord]) -> float:
    if not records:
        raise ValueError("empty log")
    return (records[-1].sim_time_ms - records[0].sim_time_ms) / 1000.0


def score(records: list[LogRecord], plan: MissionPlan, config: ScoreConfig,
          cohort_times_s: list[float]) -> ScoreReport:
    """Score one flight against its plan within a cohort of completion times.

    Per-waypoint distance scores are ``clamp(1 - d/d_max, 0, 1)`` and their
    mean always counts; the time term ``1 - (T - Tmin)/(Tmax - Tmin)`` (1 for
    a single-time cohort) and the photo indicator count only when the final
    waypoint's closest approach beat ``delta_m``.
    """
    if not cohort_times_s:
        raise ValueError("cohort must contain at least one completion time")
    t = log_duration_s(records)
    t_min, t_max = min(cohort_times_s), max(cohort_times_s)
    if not (t_min - 1e-9 <= t <= t_max + 1e-9):
        raise ValueError(f"this log's completion time {t} s is outside the cohort")

    distances = closest_distances(records, plan)
    wp_scores = [min(1.0, max(0.0, 1.0 - d / config.d_max_m)) for d in distances]
    d_bar = sum(wp_scores) / len(wp_scores)
    final_d = distances[-1]
    gate_passed = final_d < config.delta_m
    photo = 1 if any(r.photo_event for r in records) else 0

    if gate_passed:
        time_term = 1.0 if t_max == t_min else 1.0 - (t - t_min) / (t_max - t_min)
        total = (d_bar + time_term + photo) / 3.0
    else:
        total = d_bar / 3.0

    return ScoreReport(
        per_waypoint_distance_m=tuple(distances), d_bar=d_bar,
        final_distance_m=final_d, t_s=t, t_min_s=t_min, t_max_s=t_max,
        photo=photo, gate_passed=gate_passed, score=total)


@dataclass(frozen=True)
class PathAnalytics:
    points: np.ndarray             # (n, 3) ENU, fixed arc-length spacing
    speeds_mps: np.ndarray         # (n,)
    headings_deg: np.ndarray       # (n,) incoming-segment direction
    markers: tuple[tuple[int, float], ...]  # (point index, unsigned turn angle)
    degenerate: bool

    @property
    def marker_indices(self) -> list[int]:
        return [i for i, _ in self.markers]


_EMPTY = PathAnalytics(points=np.zeros((0, 3)), speeds_mps=np.zeros(0),
                       headings_deg=np.zeros(0), markers=(), degenerate=True)


def analyze_path(records: list[LogRecord], spacing_m: float = 1.0,
                 turn_threshold_deg: float = 20.0) -> PathAnalytics:
    """Resample the flown trajectory at fixed arc-length spacing and mark
    every point whose unsigned heading change between the incoming and
    outgoing resampled segments exceeds the threshold."""
    if spacing_m <= 0:
        raise ValueError("spacing must be positive")
    if len(records) < 2:
        return _EMPTY
    ref = GeoReference(records[0].position)
    raw = log_enu_positions(records, ref)
    speeds_raw = np.array([r.velocity_enu.norm() for r in records])

    # drop stationary samples so the arc-length axis is strictly increasing
    seg_len = np.linalg.norm(np.diff(raw, axis=0), axis=1)
    keep = np.concatenate([[True], seg_len > 0.0])
    raw = raw[keep]
    speeds_raw = speeds_raw[keep]
    if len(raw) < 2:
        return _EMPTY
    seg_len = np.linalg.norm(np.diff(raw, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = float(cum[-1])
    if total < spacing_m:
        return _EMPTY

    n_pts = int(total / spacing_m + 1e-9) + 1
    targets = np.arange(n_pts) * spacing_m
    east = np.interp(targets, cum, raw[:, 0])
    north = np.interp(targets, cum, raw[:, 1])
    up = np.interp(targets, cum, raw[:, 2])
    points = np.column_stack([east, north, up])

    sample_idx = np.rint(np.interp(targets, cum, np.arange(len(raw)))).astype(int)
    speeds = speeds_raw[sample_idx]

    headings = np.zeros(n_pts)
    prev = 0.0
    for k in range(1, n_pts):
        de = east[k] - east[k - 1]
        dn = north[k] - north[k - 1]
        if math.hypot(de, dn) > 1e-12:
            prev = math.degrees(math.atan2(de, dn)) % 360.0
        headings[k] = prev
    if n_pts > 1:
        headings[0] = headings[1]

    markers = []
    for k in range(1, n_pts - 1):
        turn = abs(wrap_angle_180(headings[k + 1] - headings[k]))
        if turn > turn_threshold_deg:
            markers.append((k, turn))

    return PathAnalytics(points=points, speeds_mps=speeds, headings_deg=headings,
                         markers=tuple(markers), degenerate=False)


PLOT_HEADER = "east_m,north_m,up_m,speed_mps,heading_deg,marker"


def export_plot_data(analytics: PathAnalytics) -> str:
    """Resampled points with speed and turn markers as a 6-column CSV."""
    marked = {i for i, _ in analytics.markers}
    out = io.StringIO()
    out.write(PLOT_HEADER + "\n")
    for i, (e, n, u) in enumerate(analytics.points):
        out.write(f"{e:.9g},{n:.9g},{u:.9g},{analytics.speeds_mps[i]:.9g},"
                  f"{analytics.headings_deg[i]:.9g},{1 if i in marked else 0}\n")
    return out.getvalue()
