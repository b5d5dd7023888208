"""Acceptance suite: one test per release criterion, each printing a
machine-greppable PASS line. Run with ``pytest tests/test_acceptance.py -s``.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from gcsim.control import ArcState, BallState, ControlFrame, UserPose, ball_to_command
from gcsim.flightlog import (
    LogRecord,
    ScoreConfig,
    analyze_path,
    closest_distances,
    read_log,
    score,
    write_log,
)
from gcsim.geodesy import (
    EcefVector,
    EnuVector,
    GeodeticPosition,
    GeoReference,
    TakeoffDatum,
    ecef_to_geodetic,
    enu_to_geodetic,
    geodetic_to_ecef,
    geodetic_to_enu,
)
from gcsim.mission import (
    MissionAction,
    MissionPlan,
    MissionState,
    Waypoint,
    validate_plan,
)
from gcsim.protocol import (
    DecodeError,
    MissionCommand,
    SafetyOverride,
    Telemetry,
    VehicleAction,
    VehicleCommand,
    WIRE_SIZES,
    WaypointUpload,
    channel_of,
    decode,
    encode,
    waypoint_upload_size,
)
from gcsim.runtime import SimSession, run_script
from gcsim.scenario import (
    Script,
    ScriptEvent,
    load_scenario_file,
    load_script_file,
    save_plan,
)
from gcsim.terrain import HeightField, height_at, synthetic_field
from gcsim.vehicle import FlightPhase, VehicleParams, VelocityCommand
from tests.conftest import ORIGIN, make_scenario
from tests.test_flightlog import one_shot_log, rec_at_enu, square_log, wp_at_enu, DATUM
from tests.test_mission import anchor_ref, datum_at, wp_at
from tests.test_protocol import random_message
from tests.test_runtime import control_msg

REPO = Path(__file__).resolve().parent.parent


def report(label: str) -> None:
    print(f"ACCEPTANCE PASS: {label}")


# -- independent scoring oracle (own geodesy, own arithmetic) ---------------------

_A = 6378137.0
_F = 1.0 / 298.257223563
_E2 = _F * (2.0 - _F)


def _oracle_ecef(lat_deg, lon_deg, alt):
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    s, c = math.sin(lat), math.cos(lat)
    n = _A / math.sqrt(1.0 - _E2 * s * s)
    return ((n + alt) * c * math.cos(lon), (n + alt) * c * math.sin(lon),
            (n * (1.0 - _E2) + alt) * s)


def _oracle_enu(lat, lon, alt, ref_lat, ref_lon, ref_alt):
    x, y, z = _oracle_ecef(lat, lon, alt)
    xr, yr, zr = _oracle_ecef(ref_lat, ref_lon, ref_alt)
    dx, dy, dz = x - xr, y - yr, z - zr
    la, lo = math.radians(ref_lat), math.radians(ref_lon)
    sl, cl = math.sin(la), math.cos(la)
    so, co = math.sin(lo), math.cos(lo)
    e = -so * dx + co * dy
    n = -sl * co * dx - sl * so * dy + cl * dz
    u = cl * co * dx + cl * so * dy + sl * dz
    return e, n, u


def oracle_score(csv_text: str, plan_yaml: str, delta_m: float, d_max_m: float,
                 cohort: list[float]) -> float:
    plan = yaml.safe_load(plan_yaml)
    ref_lat = plan["takeoff"]["lat"]
    ref_lon = plan["takeoff"]["lon"]
    terrain_h = plan["takeoff"]["terrain_height_m"]

    rows = [ln.split(",") for ln in csv_text.strip().splitlines()[1:]]
    samples = [_oracle_enu(float(r[1]), float(r[2]), float(r[3]),
                           ref_lat, ref_lon, terrain_h) for r in rows]
    t = (int(rows[-1][0]) - int(rows[0][0])) / 1000.0
    photo = 1 if any(r[12] == "1" for r in rows) else 0

    distances = []
    for wp in plan["waypoints"]:
        w = _oracle_enu(wp["lat"], wp["lon"], terrain_h + wp["alt_rel_m"],
                        ref_lat, ref_lon, terrain_h)
        best = min(math.dist(s, w) for s in samples)
        distances.append(best)

    wp_scores = [min(1.0, max(0.0, 1.0 - d / d_max_m)) for d in distances]
    d_bar = sum(wp_scores) / len(wp_scores)
    if distances[-1] < delta_m:
        t_min, t_max = min(cohort), max(cohort)
        time_term = 1.0 if t_max == t_min else 1.0 - (t - t_min) / (t_max - t_min)
        return (d_bar + time_term + photo) / 3.0
    return d_bar / 3.0


def generate_cohort_logs():
    """Twenty varied simulator runs: mixed terrains, speeds, outcomes."""
    rng = np.random.default_rng(2024)
    runs = []
    for i in range(20):
        sloped = i % 2 == 0
        if sloped:
            field = synthetic_field(width_m=100, depth_m=250, slope_m=95.0,
                                    base_m=215.0, cell_size_m=5.0, origin=ORIGIN)
            sc = make_scenario(field, user_xy=(50.0, 20.0),
                               speed_mps=float(rng.uniform(4, 8)))
            area = ((20.0, 80.0), (40.0, 200.0))
        else:
            field = synthetic_field(width_m=400, depth_m=400, slope_m=0.0,
                                    base_m=215.0, cell_size_m=20.0, origin=ORIGIN)
            sc = make_scenario(field, user_xy=(200.0, 200.0),
                               speed_mps=float(rng.uniform(4, 8)))
            area = ((120.0, 280.0), (120.0, 280.0))
        n_wp = int(rng.integers(2, 5))
        wps = []
        start_xy = (50.0, 20.0) if sloped else (200.0, 200.0)
        wps.append(wp_at(field, start_xy[0], start_xy[1] + 20.0,
                         float(rng.uniform(25, 40))))
        for k in range(n_wp - 1):
            x = float(rng.uniform(*area[0]))
            y = float(rng.uniform(*area[1]))
            ground = 215.0 + (95.0 * y / 250.0 if sloped else 0.0)
            alt_rel = ground - 215.0 + float(rng.uniform(25, 45))
            camera = k == n_wp - 2 and bool(rng.integers(0, 2))
            wps.append(wp_at(field, x, y, alt_rel, camera=camera))
        duration = float(rng.integers(60, 140))
        events = [ScriptEvent(0.5, WaypointUpload(tuple(wps))),
                  ScriptEvent(1.0, MissionCommand(MissionAction.START))]
        if i % 5 == 4:  # every fifth run aborts early: gate must fail
            events.append(ScriptEvent(12.0, MissionCommand(MissionAction.ABORT)))
        result = run_script(sc, Script(duration_s=duration, events=tuple(events)))
        assert result.plan is not None
        runs.append((write_log(result.records), save_plan(result.plan)))
    return runs


def test_score_formula_fidelity():
    config = ScoreConfig(delta_m=10.0, d_max_m=50.0)

    # hand-computable substitutions
    records, plan = one_shot_log([25.0, 15.0])
    elapsed = -time.perf_counter()
    r1 = score(records, plan, config, [100.0, 80.0, 120.0])
    elapsed += time.perf_counter()
    assert r1.d_bar == pytest.approx(0.6, abs=1e-9)
    assert r1.score == pytest.approx(0.2, abs=1e-9)

    records, plan = one_shot_log([7.0, 3.0], photo=True, duration_s=80.0)
    elapsed -= time.perf_counter()
    r2 = score(records, plan, config, [80.0, 100.0, 120.0])
    elapsed += time.perf_counter()
    assert r2.score == pytest.approx((0.9 + 1.0 + 1.0) / 3.0, abs=1e-9)

    # delta is strict: a 10.001 m final approach earns no gate
    records, plan = one_shot_log([10.001], photo=True)
    just_out = score(records, plan, config, [100.0])
    assert just_out.gate_passed is False
    assert just_out.score == pytest.approx(just_out.d_bar / 3.0, abs=1e-12)

    # twenty simulator-generated logs against the independent oracle
    runs = generate_cohort_logs()
    parsed = [(read_log(csv), csv, plan_yaml) for csv, plan_yaml in runs]
    cohort = [(r[-1].sim_time_ms - r[0].sim_time_ms) / 1000.0 for r, _, _ in parsed]
    gates = set()
    for recs, csv_text, plan_yaml in parsed:
        from gcsim.scenario import load_plan
        plan = load_plan(plan_yaml)
        elapsed -= time.perf_counter()
        got = score(recs, plan, config, cohort)
        elapsed += time.perf_counter()
        want = oracle_score(csv_text, plan_yaml, 10.0, 50.0, cohort)
        assert got.score == pytest.approx(want, abs=1e-9)
        gates.add(got.gate_passed)
    assert gates == {True, False}  # the cohort exercises both branches
    assert elapsed < 1.0
    report(f"score formula: substitutions exact, 20-log oracle match, "
           f"strict 10 m gate, scoring took {elapsed * 1000:.0f} ms")


def test_geodesy_roundtrips():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_ecef = 0.0
    for _ in range(10_000):
        p = GeodeticPosition(float(rng.uniform(-90, 90)),
                             float(rng.uniform(-180, 180)),
                             float(rng.uniform(-1000, 10000)))
        e = geodetic_to_ecef(p)
        back = ecef_to_geodetic(e)
        e2 = geodetic_to_ecef(back)
        worst_ecef = max(worst_ecef, math.dist((e.x_m, e.y_m, e.z_m),
                                               (e2.x_m, e2.y_m, e2.z_m)))
    assert worst_ecef < 1e-6

    ref = GeoReference(GeodeticPosition(51.03, 13.73, 215.0))
    worst_enu = 0.0
    for _ in range(10_000):
        v = EnuVector(float(rng.uniform(-10000, 10000)),
                      float(rng.uniform(-10000, 10000)),
                      float(rng.uniform(-500, 2000)))
        p = enu_to_geodetic(v, ref)
        b = geodetic_to_enu(p, ref)
        worst_enu = max(worst_enu, math.dist((v.east_m, v.north_m, v.up_m),
                                             (b.east_m, b.north_m, b.up_m)))
    elapsed = time.perf_counter() - start
    assert worst_enu < 1e-6
    assert elapsed < 5.0
    report(f"geodesy round-trips: 2x10^4 points, worst ECEF {worst_ecef:.2e} m, "
           f"worst ENU {worst_enu:.2e} m, {elapsed:.2f} s")


def test_control_frame_laws():
    from gcsim.control import ControlParams
    rng = np.random.default_rng(202)
    params = ControlParams()
    limits = VehicleParams()
    user_pos = GeodeticPosition(51.03, 13.73, 215.0)

    def rand_ball():
        v = rng.normal(size=3)
        v = v / np.linalg.norm(v) * rng.uniform(0, 1) ** (1 / 3)
        return BallState(float(v[0]), float(v[1]), float(v[2]))

    worst_eq = 0.0
    worst_rot = 0.0
    for _ in range(10_000):
        ball = rand_ball()
        arc = ArcState(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        yaw = float(rng.uniform(0, 360))
        user = UserPose(position=user_pos, heading_deg=yaw)
        a = ball_to_command(ball, arc, ControlFrame.DRONE_CENTRIC, yaw, user,
                            params, limits)
        b = ball_to_command(ball, arc, ControlFrame.USER_CENTRIC, yaw, user,
                            params, limits)
        worst_eq = max(worst_eq,
                       abs(a.v_enu_cmd.east_m - b.v_enu_cmd.east_m),
                       abs(a.v_enu_cmd.north_m - b.v_enu_cmd.north_m),
                       abs(a.v_enu_cmd.up_m - b.v_enu_cmd.up_m),
                       abs(a.yaw_rate_cmd_dps - b.yaw_rate_cmd_dps))

        t = math.radians(float(rng.uniform(0, 360)))
        x2 = ball.x * math.cos(t) + ball.z * math.sin(t)
        z2 = -ball.x * math.sin(t) + ball.z * math.cos(t)
        rot_cmd = ball_to_command(BallState(x2, ball.y, z2), arc,
                                  ControlFrame.USER_CENTRIC, 0.0,
                                  UserPose(position=user_pos, heading_deg=0.0),
                                  params, limits)
        base = ball_to_command(ball, arc, ControlFrame.USER_CENTRIC, 0.0,
                               UserPose(position=user_pos, heading_deg=0.0),
                               params, limits)
        e_want = (base.v_enu_cmd.east_m * math.cos(t)
                  + base.v_enu_cmd.north_m * math.sin(t))
        n_want = (-base.v_enu_cmd.east_m * math.sin(t)
                  + base.v_enu_cmd.north_m * math.cos(t))
        worst_rot = max(worst_rot,
                        abs(rot_cmd.v_enu_cmd.east_m - e_want),
                        abs(rot_cmd.v_enu_cmd.north_m - n_want),
                        abs(rot_cmd.v_enu_cmd.up_m - base.v_enu_cmd.up_m))
    assert worst_eq == 0.0
    assert worst_rot < 1e-9
    report(f"control frame laws: 10^4 inputs, equivalence exact, "
           f"equivariance worst {worst_rot:.2e}")


def test_task_a_analogue():
    scenario = load_scenario_file(REPO / "scenarios" / "ramp_field.yaml")
    script = load_script_file(REPO / "scenarios" / "survey_mission.yaml")
    start = time.perf_counter()
    result = run_script(scenario, script)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    assert result.plan is not None and len(result.plan.waypoints) == 4
    assert not result.error_acks
    phases = {r.phase for r in result.records}
    assert FlightPhase.CRASHED not in phases
    assert any(r.phase is FlightPhase.MISSION for r in result.records)
    distances = closest_distances(result.records, result.plan)
    assert all(d <= 2.5 for d in distances), distances
    assert sum(r.photo_event for r in result.records) == 1
    report(f"task A analogue: 4 waypoints, worst approach "
           f"{max(distances):.2f} m, one photo, {elapsed:.2f} s wall")


def test_task_b_analogue(flat_field):
    # operator faces north; the vehicle takes off in front of them, is pushed
    # left (west), released, then pulled back toward the operator (south)
    sc = make_scenario(flat_field, user_xy=(300.0, 250.0), user_heading=0.0)
    script = Script(duration_s=40.0, events=(
        ScriptEvent(0.5, VehicleCommand(VehicleAction.TAKEOFF)),
        ScriptEvent(6.0, control_msg((-1.0, 0.0, 0.0))),   # push left
        ScriptEvent(14.0, control_msg((0.0, 0.0, 0.0))),   # release
        ScriptEvent(20.0, control_msg((0.0, 0.0, -1.0))),  # pull toward user
        ScriptEvent(28.0, control_msg((0.0, 0.0, 0.0))),
    ))
    result = run_script(sc, script)

    # the short default takeoff (1.2 m) finishes well before the first push,
    # so both legs are flown entirely from hover
    at_5s = next(r for r in result.records if r.sim_time_ms == 5000)
    assert at_5s.phase is FlightPhase.HOVERING

    ref = GeoReference(result.records[0].position)
    def enu_at(t_s):
        rec = min(result.records, key=lambda r: abs(r.sim_time_ms - t_s * 1000))
        return geodetic_to_enu(rec.position, ref)

    def heading(frm, to):
        return math.degrees(math.atan2(to.east_m - frm.east_m,
                                       to.north_m - frm.north_m)) % 360.0

    leg1 = heading(enu_at(7.0), enu_at(14.0))
    leg2 = heading(enu_at(21.0), enu_at(28.0))
    assert abs((leg1 - 270.0 + 180) % 360 - 180) <= 15.0  # west
    assert abs((leg2 - 180.0 + 180) % 360 - 180) <= 15.0  # south

    # analyze the maneuver window: after the takeoff climb, through both legs
    window = [r for r in result.records if 5000 <= r.sim_time_ms <= 34000]
    analytics = analyze_path(window, spacing_m=1.0, turn_threshold_deg=20.0)
    assert not analytics.degenerate
    assert len(analytics.markers) == 1
    idx, angle = analytics.markers[0]
    assert 0 < idx < len(analytics.points) - 1
    assert angle > 20.0
    report(f"task B analogue: legs {leg1:.1f}/{leg2:.1f} deg, one interior "
           f"marker of {angle:.1f} deg")


def test_codec_roundtrip_fuzz_channels_layout():
    rng = np.random.default_rng(303)
    for _ in range(10_000):
        m = random_message(rng)
        data = encode(m)
        assert decode(data) == m

    # layout lengths, byte for byte, from the wire table
    assert WIRE_SIZES[0x01] == 1 + 4 + 8 + 8 + 8 + 8 + 4 * 6 + 1 * 5  # 66
    assert WIRE_SIZES[0x02] == 1 + 1 + 4 * 5                          # 22
    assert waypoint_upload_size(1) == 2 + 29
    assert waypoint_upload_size(4) == 118
    assert WIRE_SIZES[0x04] == 2 and WIRE_SIZES[0x05] == 2 and WIRE_SIZES[0x06] == 2
    assert WIRE_SIZES[0x07] == 1 + 8 + 8 + 8 + 4                      # 29
    assert WIRE_SIZES[0x08] == 3
    for m, size in [
        (VehicleCommand(VehicleAction.EMERGENCY_STOP), 2),
        (SafetyOverride(True), 2),
    ]:
        assert len(encode(m)) == size

    # exhaustive channel mapping
    seen = set()
    for _ in range(500):
        m = random_message(rng)
        seen.add(type(m).__name__)
        assert channel_of(m).name == ("LOSSY_LOW_LATENCY" if isinstance(m, Telemetry)
                                      else "RELIABLE_ORDERED")
    assert len(seen) == 8

    # fuzz: 10^6 random byte strings, zero faults
    start = time.perf_counter()
    blob = rng.integers(0, 256, size=40_000_000, dtype=np.uint8).tobytes()
    lengths = rng.integers(0, 80, size=1_000_000)
    offset = 0
    decoded_ok = 0
    for n in lengths:
        data = blob[offset:offset + int(n)]
        offset += int(n)
        try:
            decode(data)
            decoded_ok += 1
        except DecodeError:
            pass
    elapsed = time.perf_counter() - start
    report(f"codec: 10^4 round-trips, 10^6 fuzz inputs with zero faults "
           f"({decoded_ok} decoded) in {elapsed:.1f} s, layouts exact")


def test_telemetry_cadence_60s(flat_field):
    sc = make_scenario(flat_field, user_xy=(200.0, 200.0))
    session = SimSession(sc)
    session.handle_message(VehicleCommand(VehicleAction.TAKEOFF))
    frames = []
    for _ in range(60 * sc.tick_hz):
        frames.extend(session.tick())
    assert abs(len(frames) - 600) <= 1
    seqs = [decode(f).seq for f in frames]
    assert all(b > a for a, b in zip(seqs, seqs[1:]))
    report(f"telemetry cadence: {len(frames)} frames in 60 s, "
           f"sequence strictly increasing")


def test_headless_determinism():
    scenario = load_scenario_file(REPO / "scenarios" / "ramp_field.yaml")
    script = load_script_file(REPO / "scenarios" / "survey_mission.yaml")
    a = write_log(run_script(scenario, script).records)
    b = write_log(run_script(scenario, script).records)
    assert a == b
    import hashlib
    digest = hashlib.sha256(a.encode()).hexdigest()
    report(f"determinism: two scripted runs byte-identical (sha256 {digest[:12]})")


def test_path_analytics():
    analytics = analyze_path(square_log(), spacing_m=1.0, turn_threshold_deg=20.0)
    assert len(analytics.markers) == 3
    assert all(abs(angle - 90.0) <= 2.0 for _, angle in analytics.markers)

    straight = [rec_at_enu(i * 0.5, 0.0, 30.0, 100 * (i + 1), v=(5.0, 0.0, 0.0))
                for i in range(200)]
    assert analyze_path(straight).markers == ()

    theta = math.radians(61.0)
    c, s = math.cos(theta), math.sin(theta)
    ref = GeoReference(DATUM.takeoff_position)
    rotated = []
    for r in square_log():
        enu = geodetic_to_enu(r.position, ref)
        rotated.append(rec_at_enu(enu.east_m * c - enu.north_m * s,
                                  enu.east_m * s + enu.north_m * c,
                                  enu.up_m, r.sim_time_ms))
    rot = analyze_path(rotated)
    assert rot.marker_indices == analytics.marker_indices
    report("path analytics: square 3x90 deg, straight 0, rotation-invariant markers")


def tent_field(peak_m: float) -> HeightField:
    """Flat aprons with a sharp east-west ridge across the middle."""
    n_cols, n_rows, cell = 21, 21, 10.0
    rows = []
    for r in range(n_rows):
        y = (n_rows - 1 - r) * cell
        bump = peak_m * max(0.0, 1.0 - abs(y - 100.0) / 30.0)
        rows.append(tuple(215.0 + bump for _ in range(n_cols)))
    return HeightField(origin=ORIGIN, cell_size_m=cell, n_cols=n_cols,
                       n_rows=n_rows, heights=tuple(rows))


def test_validation_soundness():
    rng = np.random.default_rng(404)
    flown = 0
    for trial in range(100):
        slope = float(rng.uniform(0.0, 110.0))
        field = synthetic_field(width_m=120, depth_m=250, slope_m=slope,
                                base_m=215.0, cell_size_m=5.0, origin=ORIGIN)
        sc = make_scenario(field, user_xy=(60.0, 25.0), speed_mps=8.0, clearance_m=5.0)
        datum_h = height_at(field, sc.vehicle_start)
        wps = [wp_at(field, 60.0, 45.0, float(rng.uniform(28, 40)))]
        for _ in range(int(rng.integers(1, 3))):
            x = float(rng.uniform(25, 95))
            y = float(rng.uniform(50, 210))
            ground = 215.0 + slope * y / 250.0
            alt_rel = (ground - datum_h) + float(rng.uniform(28, 45))
            wps.append(wp_at(field, x, y, alt_rel))
        plan = MissionPlan(waypoints=tuple(wps),
                           takeoff_datum=TakeoffDatum(
                               GeodeticPosition(sc.vehicle_start.latitude_deg,
                                                sc.vehicle_start.longitude_deg,
                                                datum_h), datum_h),
                           speed_mps=8.0)
        assert validate_plan(plan, field, 5.0).ok

        session = SimSession(sc)
        assert session.handle_message(WaypointUpload(tuple(wps))).code.name == "OK"
        session.handle_message(MissionCommand(MissionAction.START))
        for _ in range(12000):
            session.tick()
            if session.mission.state is MissionState.COMPLETED:
                break
        assert session.mission.state is MissionState.COMPLETED, f"trial {trial}"
        assert all(r.phase is not FlightPhase.CRASHED for r in session.records)
        flown += 1

    rejected = 0
    for trial in range(20):
        peak = float(rng.uniform(40.0, 90.0))
        field = tent_field(peak)
        datum = datum_at(field, 100.0, 30.0)
        # endpoints on the flat aprons clear their local ground; the straight
        # leg cannot outclimb the ridge between them
        a = wp_at(field, 100.0, 30.0, 20.0)
        b = wp_at(field, 100.0, 170.0, 20.0)
        plan = MissionPlan(waypoints=(a, b), takeoff_datum=datum, speed_mps=5.0)
        verdict = validate_plan(plan, field, 5.0)
        assert not verdict.ok, f"ridge plan {trial} wrongly accepted"
        assert any(v.kind == "segment-below-clearance" for v in verdict.violations)
        rejected += 1

    report(f"validation soundness: {flown}/100 valid plans flown crash-free, "
           f"{rejected}/20 ridge plans rejected")
