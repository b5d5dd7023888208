"""FastAPI service wrapping the simulation session.

One background task owns the session and advances it at the tick rate
(wall-clock paced or as fast as possible); WebSocket clients exchange binary
protocol frames with it through a single ordered command queue, and a small
REST surface exposes health, state, and offline scoring/analysis.
"""

from __future__ import annotations

import asyncio
import itertools
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import flightlog, protocol
from .runtime import SimSession
from .scenario import Scenario, ScenarioError, load_plan
from .vehicle import FlightPhase


class SimServer:
    def __init__(self, scenario: Scenario, realtime: bool = False,
                 log_dir: str | Path | None = None):
        self.session = SimSession(scenario)
        self.realtime = realtime
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.commands: asyncio.Queue[tuple[int, protocol.Message]] = asyncio.Queue()
        self.clients: dict[int, WebSocket] = {}
        self._client_ids = itertools.count(1)
        self._airborne_since: int | None = None
        self._flight_count = 0

    def register(self, ws: WebSocket) -> int:
        cid = next(self._client_ids)
        self.clients[cid] = ws
        return cid

    def unregister(self, cid: int) -> None:
        self.clients.pop(cid, None)

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        start = loop.time()
        ticks = 0
        while True:
            while True:
                try:
                    cid, msg = self.commands.get_nowait()
                except asyncio.QueueEmpty:
                    break
                ack = self.session.handle_message(msg)
                if ack is not None:
                    await self._send_to(cid, protocol.encode(ack))
            frames = self.session.tick()
            ticks += 1
            for frame in frames:
                await self._broadcast(frame)
            self._track_flight_sessions()
            if self.realtime:
                target = start + ticks * self.session.scenario.dt_s
                delay = target - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)

    async def _send_to(self, cid: int, frame: bytes) -> None:
        ws = self.clients.get(cid)
        if ws is None:
            return
        try:
            await ws.send_bytes(frame)
        except Exception:
            self.unregister(cid)

    async def _broadcast(self, frame: bytes) -> None:
        for cid in list(self.clients):
            await self._send_to(cid, frame)

    def _track_flight_sessions(self) -> None:
        """Write one log file per takeoff..touchdown span when a log dir is set."""
        if self.log_dir is None:
            return
        phase = self.session.vehicle.state.phase
        flying = phase not in (FlightPhase.GROUNDED, FlightPhase.CRASHED)
        if flying and self._airborne_since is None:
            self._airborne_since = max(0, len(self.session.records) - 1)
        elif not flying and self._airborne_since is not None:
            records = self.session.records[self._airborne_since:]
            self._airborne_since = None
            if records:
                self._flight_count += 1
                self.log_dir.mkdir(parents=True, exist_ok=True)
                name = f"flight_{self._flight_count:03d}{flightlog.LOG_FILE_SUFFIX}"
                (self.log_dir / name).write_text(flightlog.write_log(records))


# -- REST models ----------------------------------------------------------------


class HealthOut(BaseModel):
    status: str
    sim_time_s: float
    clients: int


class TerrainOut(BaseModel):
    origin_lat: float
    origin_lon: float
    width_m: float
    depth_m: float
    cell_size_m: float
    min_height_m: float
    max_height_m: float


class TerrainGridOut(TerrainOut):
    n_cols: int
    n_rows: int
    heights: list[list[float]]  # row 0 = northernmost


class ScenarioOut(BaseModel):
    name: str
    tick_hz: int
    mission_speed_mps: float
    mission_clearance_m: float
    terrain: TerrainOut
    user_lat: float
    user_lon: float
    user_heading_deg: float


class StateOut(BaseModel):
    sim_time_s: float
    lat: float
    lon: float
    alt_wgs84_m: float
    alt_rel_m: float
    v_east_mps: float
    v_north_mps: float
    v_up_mps: float
    yaw_deg: float
    gimbal_pitch_deg: float
    battery_pct: float
    gps_level: int
    phase: str
    mission_state: str
    mission_index: int
    safety_override: bool


class LogIn(BaseModel):
    name: str
    csv: str


class ScoreConfigIn(BaseModel):
    delta_m: float = 10.0
    d_max_m: float = 50.0


class ScoreRequest(BaseModel):
    plan_yaml: str
    config: ScoreConfigIn = Field(default_factory=ScoreConfigIn)
    logs: list[LogIn]


class ScoreOut(BaseModel):
    name: str
    score: float
    d_bar: float
    per_waypoint_distance_m: list[float]
    final_distance_m: float
    completion_time_s: float
    gate_passed: bool
    photo: int


class ScoreResponse(BaseModel):
    reports: list[ScoreOut]


class AnalyzeRequest(BaseModel):
    csv: str
    spacing_m: float = 1.0
    turn_threshold_deg: float = 20.0


class AnalyzeResponse(BaseModel):
    plot_csv: str
    marker_count: int
    degenerate: bool


def create_app(scenario: Scenario, realtime: bool = False,
               log_dir: str | Path | None = None,
               frontend_dir: str | Path | None = None) -> FastAPI:
    server = SimServer(scenario, realtime=realtime, log_dir=log_dir)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(server.run())
        try:
            yield
        finally:
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass

    app = FastAPI(title="gcsim", lifespan=lifespan)
    app.state.server = server

    @app.get("/health", response_model=HealthOut)
    def health() -> HealthOut:
        return HealthOut(status="ok", sim_time_s=server.session.time_ms / 1000.0,
                         clients=len(server.clients))

    @app.get("/scenario", response_model=ScenarioOut)
    def scenario_info() -> ScenarioOut:
        sc = server.session.scenario
        t = sc.terrain
        return ScenarioOut(
            name=sc.name, tick_hz=sc.tick_hz,
            mission_speed_mps=sc.mission_speed_mps,
            mission_clearance_m=sc.mission_clearance_m,
            terrain=TerrainOut(
                origin_lat=t.origin.latitude_deg, origin_lon=t.origin.longitude_deg,
                width_m=t.width_m, depth_m=t.depth_m, cell_size_m=t.cell_size_m,
                min_height_m=t.min_height(), max_height_m=t.max_height()),
            user_lat=sc.user.position.latitude_deg,
            user_lon=sc.user.position.longitude_deg,
            user_heading_deg=sc.user.heading_deg)

    @app.get("/terrain", response_model=TerrainGridOut)
    def terrain_grid() -> TerrainGridOut:
        t = server.session.scenario.terrain
        return TerrainGridOut(
            origin_lat=t.origin.latitude_deg, origin_lon=t.origin.longitude_deg,
            width_m=t.width_m, depth_m=t.depth_m, cell_size_m=t.cell_size_m,
            min_height_m=t.min_height(), max_height_m=t.max_height(),
            n_cols=t.n_cols, n_rows=t.n_rows,
            heights=[list(row) for row in t.heights])

    @app.get("/state", response_model=StateOut)
    def state() -> StateOut:
        session = server.session
        s = session.vehicle.state
        return StateOut(
            sim_time_s=session.time_ms / 1000.0,
            lat=s.position.latitude_deg, lon=s.position.longitude_deg,
            alt_wgs84_m=s.position.altitude_m, alt_rel_m=session.alt_rel_m(),
            v_east_mps=s.velocity_enu.east_m, v_north_mps=s.velocity_enu.north_m,
            v_up_mps=s.velocity_enu.up_m, yaw_deg=s.yaw_deg,
            gimbal_pitch_deg=s.gimbal_pitch_deg, battery_pct=s.battery_pct,
            gps_level=s.gps_level, phase=s.phase.name,
            mission_state=session.mission.state.name,
            mission_index=session.mission.current_index,
            safety_override=session.override_active)

    @app.post("/score", response_model=ScoreResponse)
    def score_logs(req: ScoreRequest) -> ScoreResponse:
        try:
            plan = load_plan(req.plan_yaml)
            config = flightlog.ScoreConfig(delta_m=req.config.delta_m,
                                           d_max_m=req.config.d_max_m)
            logs = [(entry.name, flightlog.read_log(entry.csv)) for entry in req.logs]
        except (ScenarioError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        if not logs:
            raise HTTPException(status_code=422, detail="no logs supplied")
        cohort = [flightlog.log_duration_s(records) for _, records in logs]
        reports = []
        for name, records in logs:
            r = flightlog.score(records, plan, config, cohort)
            reports.append(ScoreOut(
                name=name, score=r.score, d_bar=r.d_bar,
                per_waypoint_distance_m=list(r.per_waypoint_distance_m),
                final_distance_m=r.final_distance_m, completion_time_s=r.t_s,
                gate_passed=r.gate_passed, photo=r.photo))
        reports.sort(key=lambda r: r.score, reverse=True)
        return ScoreResponse(reports=reports)

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
        try:
            records = flightlog.read_log(req.csv)
            analytics = flightlog.analyze_path(records, req.spacing_m,
                                               req.turn_threshold_deg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return AnalyzeResponse(plot_csv=flightlog.export_plot_data(analytics),
                               marker_count=len(analytics.markers),
                               degenerate=analytics.degenerate)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        cid = server.register(ws)
        try:
            while True:
                data = await ws.receive_bytes()
                try:
                    msg = protocol.decode(data)
                except protocol.DecodeError:
                    continue  # junk frames are dropped, the channel stays up
                await server.commands.put((cid, msg))
        except WebSocketDisconnect:
            pass
        finally:
            server.unregister(cid)

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="frontend")

    return app
