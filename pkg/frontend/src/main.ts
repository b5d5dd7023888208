/** Operator console wiring: WebSocket link, widget loop, map interaction. */

import { clampArc, clampBall, feedbackLevel, type Vec3 } from "./ball.js";
import {
  decode,
  encode,
  MISSION_ACTIONS,
  VEHICLE_ACTIONS,
  type Message,
  type Telemetry,
} from "./codec.js";
import { Dashboard, panelValues, renderNotifications } from "./dashboard.js";
import { MapView, type MapState } from "./map.js";
import {
  fromLocal,
  heightAtLocal,
  makeTerrain,
  toLocal,
  validateDraft,
  type TerrainGrid,
} from "./plan.js";
import { ControlStream, SessionState, type ControlSample } from "./session.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

interface ScenarioInfo {
  name: string;
  mission_clearance_m: number;
  user_lat: number;
  user_lon: number;
  user_heading_deg: number;
}

async function boot(): Promise<void> {
  const scenario = (await (await fetch("/scenario")).json()) as ScenarioInfo;
  const terrainJson = await (await fetch("/terrain")).json();
  const terrain: TerrainGrid = makeTerrain(terrainJson);
  const state0 = (await (await fetch("/state")).json()) as { alt_wgs84_m: number;
    alt_rel_m: number };
  const datumTerrainM = state0.alt_wgs84_m - state0.alt_rel_m;

  const session = new SessionState();
  const stream = new ControlStream();
  const mapState: MapState = {
    terrain,
    userXY: toLocal(terrain.frame, scenario.user_lat, scenario.user_lon),
    waypoints: [],
    selected: -1,
    plannedLocal: [],
    trail: [],
    vehicle: null,
    datumTerrainM,
  };

  const canvas = $<HTMLCanvasElement>("map");
  const view = new MapView(canvas, mapState);
  const dashboard = new Dashboard($("panels"));

  // ---- websocket link -------------------------------------------------------
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${proto}://${location.host}/ws`);
  ws.binaryType = "arraybuffer";
  ws.onopen = () => {
    session.connection = "open";
    sendPose();
  };
  ws.onclose = () => (session.connection = "closed");
  ws.onmessage = (ev) => {
    if (!(ev.data instanceof ArrayBuffer)) return;
    let message: Message;
    try {
      message = decode(new Uint8Array(ev.data));
    } catch {
      return; // tolerate junk; the stream is self-healing
    }
    session.ingest(message);
    if (message.kind === "telemetry") onTelemetry(message);
  };

  function send(message: Message): void {
    if (ws.readyState === WebSocket.OPEN) ws.send(encode(message));
  }

  function onTelemetry(t: Telemetry): void {
    mapState.vehicle = t;
    const [x, y] = toLocal(terrain.frame, t.lat, t.lon);
    const speed = Math.hypot(t.vEast, t.vNorth, t.vUp);
    const last = mapState.trail[mapState.trail.length - 1];
    if (!last || Math.hypot(last.x - x, last.y - y) > 0.25) {
      mapState.trail.push({ x, y, speed });
      if (mapState.trail.length > 2000) mapState.trail.shift();
    }
  }

  // ---- virtual ball widget ---------------------------------------------------
  const pad = $<HTMLCanvasElement>("ball-pad");
  const padCtx = pad.getContext("2d")!;
  const lift = $<HTMLInputElement>("ball-lift");
  const arcYaw = $<HTMLInputElement>("arc-yaw");
  const arcPitch = $<HTMLInputElement>("arc-pitch");
  let padXY: [number, number] = [0, 0];
  let padHeld = false;
  let liftHeld = false;
  let arcHeld = false;

  function currentSample(): ControlSample {
    const ball = clampBall([padXY[0], liftHeld ? Number(lift.value) : 0,
      padXY[1]] as Vec3);
    const arc: [number, number] = arcHeld
      ? [clampArc(Number(arcYaw.value)), clampArc(Number(arcPitch.value))]
      : [0, 0];
    const engaged = padHeld || liftHeld || arcHeld;
    return {
      frame: frameToggle.checked ? 1 : 0,
      ball: engaged ? ball : [0, 0, 0],
      arc,
      engaged,
    };
  }

  pad.addEventListener("pointerdown", (ev) => {
    padHeld = true;
    pad.setPointerCapture(ev.pointerId);
    movePad(ev);
  });
  pad.addEventListener("pointermove", (ev) => {
    if (padHeld) movePad(ev);
  });
  const releasePad = () => {
    padHeld = false;
    padXY = [0, 0];
  };
  pad.addEventListener("pointerup", releasePad);
  pad.addEventListener("pointercancel", releasePad);

  function movePad(ev: PointerEvent): void {
    const rect = pad.getBoundingClientRect();
    const cx = rect.width / 2;
    const cy = rect.height / 2;
    padXY = [
      (ev.clientX - rect.left - cx) / cx,
      -(ev.clientY - rect.top - cy) / cy, // up on the pad = forward
    ];
  }

  for (const el of [lift]) {
    el.addEventListener("pointerdown", () => (liftHeld = true));
    el.addEventListener("pointerup", () => {
      liftHeld = false;
      el.value = "0";
    });
  }
  for (const el of [arcYaw, arcPitch]) {
    el.addEventListener("pointerdown", () => (arcHeld = true));
    el.addEventListener("pointerup", () => {
      arcHeld = false;
      arcYaw.value = "0";
      arcPitch.value = "0";
    });
  }

  // audio cue: intensity follows how far the ball is pushed
  let audio: { ctx: AudioContext; gain: GainNode } | null = null;
  function audioLevel(level: number): void {
    if (!audio && level > 0) {
      const ctx = new AudioContext();
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.frequency.value = 220;
      gain.gain.value = 0;
      osc.connect(gain).connect(ctx.destination);
      osc.start();
      audio = { ctx, gain };
    }
    if (audio) audio.gain.gain.value = 0.15 * level;
  }

  window.setInterval(() => {
    const sample = currentSample();
    for (const frame of stream.update(sample, performance.now())) {
      send(frame);
    }
    const level = sample.engaged ? feedbackLevel(sample.ball) : 0;
    audioLevel(level);
    drawPad(level);
  }, 50); // at most 20 Hz on the wire

  function drawPad(level: number): void {
    const w = pad.width;
    padCtx.clearRect(0, 0, w, w);
    padCtx.strokeStyle = "#666";
    padCtx.beginPath();
    padCtx.arc(w / 2, w / 2, w / 2 - 2, 0, 2 * Math.PI);
    padCtx.stroke();
    const r = Math.hypot(padXY[0], padXY[1]);
    const k = r > 1 ? 1 / r : 1;
    const bx = w / 2 + padXY[0] * k * (w / 2 - 10);
    const by = w / 2 - padXY[1] * k * (w / 2 - 10);
    padCtx.fillStyle = `rgba(255,80,80,${0.5 + 0.5 * level})`;
    padCtx.beginPath();
    padCtx.arc(bx, by, 10, 0, 2 * Math.PI);
    padCtx.fill();
  }

  // ---- mission + safety controls ----------------------------------------------
  const frameToggle = $<HTMLInputElement>("frame-toggle");
  const overrideToggle = $<HTMLInputElement>("override-toggle");
  overrideToggle.addEventListener("change", () => {
    for (const frame of stream.setOverride(overrideToggle.checked)) send(frame);
    send({ kind: "safety_override", active: overrideToggle.checked });
  });

  VEHICLE_ACTIONS.forEach((name, action) => {
    $(`btn-${name}`).addEventListener("click", () =>
      send({ kind: "vehicle_command", action }));
  });
  MISSION_ACTIONS.forEach((name, action) => {
    $(`btn-m-${name}`).addEventListener("click", () =>
      send({ kind: "mission_command", action }));
  });

  function sendPose(): void {
    send({
      kind: "user_pose",
      lat: scenario.user_lat,
      lon: scenario.user_lon,
      alt: heightAtLocal(terrain, ...mapState.userXY) ?? 0,
      heading: Number($<HTMLInputElement>("user-heading").value) % 360,
    });
  }
  $("user-heading").addEventListener("change", sendPose);

  // ---- waypoint editing ---------------------------------------------------------
  const defaultAlt = $<HTMLInputElement>("wp-alt");
  const wpHeading = $<HTMLInputElement>("wp-heading");
  const wpPitch = $<HTMLInputElement>("wp-pitch");
  const wpCamera = $<HTMLInputElement>("wp-camera");
  const issuesEl = $("issues");
  let dragging = -1;

  function refreshPlanned(): void {
    mapState.plannedLocal = mapState.waypoints.map((wp) =>
      toLocal(terrain.frame, wp.lat, wp.lon));
    const issues = validateDraft(mapState.waypoints, terrain, datumTerrainM,
      scenario.mission_clearance_m);
    issuesEl.innerHTML = "";
    for (const issue of issues) {
      const div = document.createElement("div");
      div.className = "notice";
      div.textContent = issue.text;
      issuesEl.appendChild(div);
    }
    $<HTMLButtonElement>("btn-upload").toggleAttribute("disabled",
      mapState.waypoints.length === 0 || issues.length > 0);
  }

  function syncEditor(): void {
    const wp = mapState.waypoints[mapState.selected];
    if (!wp) return;
    defaultAlt.value = String(wp.altRel);
    wpHeading.value = String(wp.heading);
    wpPitch.value = String(wp.camPitch);
    wpCamera.checked = wp.camera;
  }

  canvas.addEventListener("pointerdown", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const px = ev.clientX - rect.left;
    const py = ev.clientY - rect.top;
    const hit = view.pick(px, py);
    if (hit >= 0) {
      mapState.selected = hit;
      dragging = hit;
      syncEditor();
    } else {
      const [x, y] = view.toLocalXY(px, py);
      if (heightAtLocal(terrain, x, y) === null) return;
      const [lat, lon] = fromLocal(terrain.frame, x, y);
      mapState.waypoints.push({
        lat,
        lon,
        altRel: Number(defaultAlt.value),
        heading: Number(wpHeading.value) % 360,
        camPitch: Number(wpPitch.value),
        camera: false,
      });
      mapState.selected = mapState.waypoints.length - 1;
      refreshPlanned();
    }
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (dragging < 0) return;
    const rect = canvas.getBoundingClientRect();
    const [x, y] = view.toLocalXY(ev.clientX - rect.left, ev.clientY - rect.top);
    const [lat, lon] = fromLocal(terrain.frame, x, y);
    const wp = mapState.waypoints[dragging];
    wp.lat = lat;
    wp.lon = lon;
    refreshPlanned();
  });
  canvas.addEventListener("pointerup", () => (dragging = -1));

  function applyEditor(): void {
    const wp = mapState.waypoints[mapState.selected];
    if (!wp) return;
    wp.altRel = Number(defaultAlt.value);
    wp.heading = ((Number(wpHeading.value) % 360) + 360) % 360;
    wp.camPitch = Math.max(-90, Math.min(0, Number(wpPitch.value)));
    if (wpCamera.checked) {
      mapState.waypoints.forEach((other, i) =>
        (other.camera = i === mapState.selected));
    } else {
      wp.camera = false;
    }
    refreshPlanned();
  }
  for (const el of [defaultAlt, wpHeading, wpPitch, wpCamera]) {
    el.addEventListener("change", applyEditor);
  }
  $("btn-delete").addEventListener("click", () => {
    if (mapState.selected >= 0) {
      mapState.waypoints.splice(mapState.selected, 1);
      mapState.selected = -1;
      refreshPlanned();
    }
  });
  $("btn-clear").addEventListener("click", () => {
    mapState.waypoints = [];
    mapState.selected = -1;
    refreshPlanned();
  });
  $("btn-upload").addEventListener("click", () => {
    if (mapState.waypoints.length > 0) {
      send({ kind: "waypoint_upload", waypoints: mapState.waypoints });
    }
  });

  // ---- render loop ----------------------------------------------------------------
  function frame(): void {
    view.draw();
    let values = null;
    if (mapState.vehicle) {
      const vxy = toLocal(terrain.frame, mapState.vehicle.lat, mapState.vehicle.lon);
      values = panelValues(mapState.vehicle, mapState.userXY, vxy);
    }
    dashboard.update(mapState.vehicle, values, session.connection);
    renderNotifications($("notices"), session.notifications);
    requestAnimationFrame(frame);
  }
  refreshPlanned();
  frame();
}

boot().catch((err) => {
  document.body.innerHTML = `<pre class="notice">console failed to start: ${err}</pre>`;
});
