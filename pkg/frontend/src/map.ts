/**
 * Top-down map: terrain shading, user/vehicle markers, draggable waypoint
 * markers with a look-at cone on the camera waypoint, the planned path, the
 * live trail colored by speed, and the leading lines anchoring the vehicle.
 */

import type { Telemetry, WaypointWire } from "./codec.js";
import {
  TerrainGrid,
  heightAtLocal,
  terrainDepthM,
  terrainWidthM,
  toLocal,
} from "./plan.js";

export interface TrailPoint {
  x: number;
  y: number;
  speed: number;
}

export interface MapState {
  terrain: TerrainGrid;
  userXY: [number, number];
  waypoints: WaypointWire[];
  selected: number;
  plannedLocal: [number, number][];
  trail: TrailPoint[];
  vehicle: Telemetry | null;
  datumTerrainM: number;
}

const PAD = 24;

export class MapView {
  private ctx: CanvasRenderingContext2D;
  private scale = 1;
  private terrainLayer: HTMLCanvasElement | null = null;

  constructor(private canvas: HTMLCanvasElement, private state: MapState) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.fit();
  }

  fit(): void {
    const w = terrainWidthM(this.state.terrain);
    const d = terrainDepthM(this.state.terrain);
    this.scale = Math.min((this.canvas.width - 2 * PAD) / w,
      (this.canvas.height - 2 * PAD) / d);
    this.terrainLayer = null;
  }

  toPx(x: number, y: number): [number, number] {
    return [PAD + x * this.scale,
      this.canvas.height - PAD - y * this.scale];
  }

  toLocalXY(px: number, py: number): [number, number] {
    return [(px - PAD) / this.scale,
      (this.canvas.height - PAD - py) / this.scale];
  }

  /** Nearest waypoint within pick radius, or -1. */
  pick(px: number, py: number): number {
    let best = -1;
    let bestDist = 14;
    this.state.waypoints.forEach((wp, i) => {
      const [x, y] = toLocal(this.state.terrain.frame, wp.lat, wp.lon);
      const [mx, my] = this.toPx(x, y);
      const d = Math.hypot(mx - px, my - py);
      if (d < bestDist) {
        best = i;
        bestDist = d;
      }
    });
    return best;
  }

  private renderTerrain(): HTMLCanvasElement {
    const t = this.state.terrain;
    const layer = document.createElement("canvas");
    layer.width = this.canvas.width;
    layer.height = this.canvas.height;
    const g = layer.getContext("2d")!;
    const span = Math.max(1e-9, t.maxHeightM - t.minHeightM);
    const step = Math.max(2, Math.floor(this.scale * t.cellSizeM / 4));
    const wpx = terrainWidthM(t) * this.scale;
    const dpx = terrainDepthM(t) * this.scale;
    for (let px = 0; px <= wpx; px += step) {
      for (let py = 0; py <= dpx; py += step) {
        const h = heightAtLocal(t, px / this.scale, py / this.scale);
        if (h === null) continue;
        const f = (h - t.minHeightM) / span;
        const r = Math.round(70 + 110 * f);
        const gg = Math.round(120 - 40 * f);
        const b = Math.round(60 - 30 * f);
        g.fillStyle = `rgb(${r},${gg},${b})`;
        const [cx, cy] = this.toPx(px / this.scale, py / this.scale);
        g.fillRect(cx, cy - step, step, step);
      }
    }
    g.strokeStyle = "#888";
    const [x0, y0] = this.toPx(0, terrainDepthM(t));
    g.strokeRect(x0, y0, wpx, dpx);
    return layer;
  }

  draw(): void {
    const { ctx } = this;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.terrainLayer) this.terrainLayer = this.renderTerrain();
    ctx.drawImage(this.terrainLayer, 0, 0);

    this.drawPlanned();
    this.drawTrail();
    this.drawLeadingLines();
    this.drawWaypoints();
    this.drawUser();
    this.drawVehicle();
  }

  private drawPlanned(): void {
    const { ctx, state } = this;
    if (state.plannedLocal.length < 2) return;
    ctx.save();
    ctx.setLineDash([6, 6]);
    ctx.strokeStyle = "#ffd84d";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    state.plannedLocal.forEach(([x, y], i) => {
      const [px, py] = this.toPx(x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.restore();
  }

  private speedColor(speed: number): string {
    const f = Math.max(0, Math.min(1, speed / 10));
    return `rgb(${Math.round(40 + 215 * f)},${Math.round(200 - 130 * f)},255)`;
  }

  private drawTrail(): void {
    const { ctx, state } = this;
    for (let i = 1; i < state.trail.length; i++) {
      const a = state.trail[i - 1];
      const b = state.trail[i];
      ctx.strokeStyle = this.speedColor(b.speed);
      ctx.lineWidth = 2;
      ctx.beginPath();
      const [ax, ay] = this.toPx(a.x, a.y);
      const [bx, by] = this.toPx(b.x, b.y);
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    }
  }

  private drawLeadingLines(): void {
    const { ctx, state } = this;
    if (!state.vehicle) return;
    const [vx, vy] = toLocal(state.terrain.frame, state.vehicle.lat,
      state.vehicle.lon);
    const [ux, uy] = state.userXY;
    const [upx, upy] = this.toPx(ux, uy);
    const [vpx, vpy] = this.toPx(vx, vy);
    ctx.strokeStyle = "#ff4fd8";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(upx, upy);
    ctx.lineTo(vpx, vpy);
    ctx.stroke();
    // the vertical leading line reads as an altitude bar beside the marker
    const barH = Math.min(70, state.vehicle.altRel * 1.2);
    ctx.beginPath();
    ctx.moveTo(vpx + 12, vpy);
    ctx.lineTo(vpx + 12, vpy - barH);
    ctx.stroke();
    ctx.fillStyle = "#ff4fd8";
    ctx.fillText(`${state.vehicle.altRel.toFixed(1)} m`, vpx + 16, vpy - barH);
  }

  private drawWaypoints(): void {
    const { ctx, state } = this;
    state.waypoints.forEach((wp, i) => {
      const [x, y] = toLocal(state.terrain.frame, wp.lat, wp.lon);
      const [px, py] = this.toPx(x, y);
      if (wp.camera) this.drawViewCone(wp, px, py);
      ctx.beginPath();
      ctx.arc(px, py, 7, 0, 2 * Math.PI);
      ctx.fillStyle = wp.camera ? "#ff9d2e" : "#ffd84d";
      ctx.fill();
      if (i === state.selected) {
        ctx.strokeStyle = "#ffffff";
        ctx.lineWidth = 2;
        ctx.stroke();
      }
      ctx.fillStyle = "#10141a";
      ctx.font = "9px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(String(i + 1), px, py + 3);
      ctx.textAlign = "start";
      // height readout near the active marker
      if (i === state.selected) {
        const ground = heightAtLocal(state.terrain, x, y);
        const agl = ground === null ? null
          : state.datumTerrainM + wp.altRel - ground;
        ctx.fillStyle = "#fff";
        ctx.font = "11px sans-serif";
        ctx.fillText(
          `h ${wp.altRel.toFixed(0)} m` + (agl === null ? " (off-map)"
            : ` | agl ${agl.toFixed(0)} m`),
          px + 10, py - 10);
      }
    });
  }

  private drawViewCone(wp: WaypointWire, px: number, py: number): void {
    const { ctx } = this;
    // ground intersection of the camera axis: altitude / tan(|pitch|)
    const pitch = Math.min(-1, wp.camPitch);
    const reach = Math.min(80, wp.altRel / Math.tan((-pitch * Math.PI) / 180));
    const h = (wp.heading * Math.PI) / 180;
    const len = reach * this.scale;
    const spread = 0.3;
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(h);
    ctx.fillStyle = "rgba(255,157,46,0.25)";
    ctx.beginPath();
    ctx.moveTo(0, 0);
    ctx.lineTo(len * Math.sin(-spread), -len * Math.cos(spread));
    ctx.lineTo(len * Math.sin(spread), -len * Math.cos(spread));
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }

  private drawUser(): void {
    const { ctx, state } = this;
    const [px, py] = this.toPx(...state.userXY);
    ctx.beginPath();
    ctx.arc(px, py, 6, 0, 2 * Math.PI);
    ctx.fillStyle = "#ff5050";
    ctx.fill();
    ctx.fillStyle = "#fff";
    ctx.font = "10px sans-serif";
    ctx.fillText("you", px + 9, py + 3);
  }

  private drawVehicle(): void {
    const { ctx, state } = this;
    if (!state.vehicle) return;
    const [x, y] = toLocal(state.terrain.frame, state.vehicle.lat,
      state.vehicle.lon);
    const [px, py] = this.toPx(x, y);
    const yaw = (state.vehicle.yaw * Math.PI) / 180;
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(yaw);
    ctx.fillStyle = "#4da3ff";
    ctx.beginPath();
    ctx.moveTo(0, -10);
    ctx.lineTo(6, 8);
    ctx.lineTo(-6, 8);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }
}
