/**
 * Draft mission plan held client-side, with instant validation feedback that
 * mirrors the server's rules: waypoint count, minimum spacing, at most one
 * camera waypoint, and terrain clearance for every waypoint and every
 * straight leg sampled at 1 m.
 */

import type { WaypointWire } from "./codec.js";

// WGS84 local-scale factors: meters per degree at a reference latitude.
const WGS_A = 6378137.0;
const WGS_F = 1 / 298.257223563;
const WGS_E2 = WGS_F * (2 - WGS_F);

export interface LocalFrame {
  lat0: number;
  lon0: number;
  mPerDegLat: number;
  mPerDegLon: number;
}

export function makeLocalFrame(lat0: number, lon0: number): LocalFrame {
  const phi = (lat0 * Math.PI) / 180;
  const s2 = Math.sin(phi) ** 2;
  const m = (WGS_A * (1 - WGS_E2)) / Math.pow(1 - WGS_E2 * s2, 1.5);
  const n = WGS_A / Math.sqrt(1 - WGS_E2 * s2);
  return {
    lat0,
    lon0,
    mPerDegLat: (m * Math.PI) / 180,
    mPerDegLon: ((n * Math.cos(phi)) * Math.PI) / 180,
  };
}

export function toLocal(frame: LocalFrame, lat: number, lon: number): [number, number] {
  return [(lon - frame.lon0) * frame.mPerDegLon,
    (lat - frame.lat0) * frame.mPerDegLat];
}

export function fromLocal(frame: LocalFrame, x: number, y: number): [number, number] {
  return [frame.lat0 + y / frame.mPerDegLat, frame.lon0 + x / frame.mPerDegLon];
}

export interface TerrainGrid {
  originLat: number;
  originLon: number;
  cellSizeM: number;
  nCols: number;
  nRows: number;
  heights: number[][]; // row 0 = northernmost
  minHeightM: number;
  maxHeightM: number;
  frame: LocalFrame;
}

export function makeTerrain(json: {
  origin_lat: number;
  origin_lon: number;
  cell_size_m: number;
  n_cols: number;
  n_rows: number;
  heights: number[][];
  min_height_m: number;
  max_height_m: number;
}): TerrainGrid {
  return {
    originLat: json.origin_lat,
    originLon: json.origin_lon,
    cellSizeM: json.cell_size_m,
    nCols: json.n_cols,
    nRows: json.n_rows,
    heights: json.heights,
    minHeightM: json.min_height_m,
    maxHeightM: json.max_height_m,
    frame: makeLocalFrame(json.origin_lat, json.origin_lon),
  };
}

export function terrainWidthM(t: TerrainGrid): number {
  return (t.nCols - 1) * t.cellSizeM;
}

export function terrainDepthM(t: TerrainGrid): number {
  return (t.nRows - 1) * t.cellSizeM;
}

/** Bilinear ground height at grid-local (x east, y north) meters, or null
 * outside the footprint. */
export function heightAtLocal(t: TerrainGrid, x: number, y: number): number | null {
  const tol = 1e-6;
  if (x < -tol || y < -tol || x > terrainWidthM(t) + tol || y > terrainDepthM(t) + tol) {
    return null;
  }
  const gx = Math.min(Math.max(x / t.cellSizeM, 0), t.nCols - 1);
  const gy = Math.min(Math.max(y / t.cellSizeM, 0), t.nRows - 1);
  const i = Math.min(Math.floor(gx), t.nCols - 2);
  const j = Math.min(Math.floor(gy), t.nRows - 2);
  const fx = gx - i;
  const fy = gy - j;
  const node = (col: number, rowFromSouth: number) =>
    t.heights[t.nRows - 1 - rowFromSouth][col];
  return (
    node(i, j) * (1 - fx) * (1 - fy) +
    node(i + 1, j) * fx * (1 - fy) +
    node(i, j + 1) * (1 - fx) * fy +
    node(i + 1, j + 1) * fx * fy
  );
}

export function heightAt(t: TerrainGrid, lat: number, lon: number): number | null {
  const [x, y] = toLocal(t.frame, lat, lon);
  return heightAtLocal(t, x, y);
}

export interface DraftIssue {
  index: number; // waypoint index or leg start index
  kind: "count" | "spacing" | "camera" | "altitude" | "out-of-bounds"
    | "waypoint-clearance" | "segment-clearance";
  text: string;
}

export function validateDraft(
  waypoints: WaypointWire[],
  terrain: TerrainGrid,
  datumTerrainM: number,
  clearanceM: number,
): DraftIssue[] {
  const issues: DraftIssue[] = [];
  if (waypoints.length < 1 || waypoints.length > 99) {
    issues.push({ index: 0, kind: "count", text: "plan needs 1..99 waypoints" });
    return issues;
  }
  if (waypoints.filter((w) => w.camera).length > 1) {
    issues.push({ index: 0, kind: "camera", text: "at most one camera waypoint" });
  }

  const pts: [number, number, number][] = [];
  waypoints.forEach((wp, i) => {
    if (wp.altRel < 0) {
      issues.push({ index: i, kind: "altitude", text: `waypoint ${i + 1}: height below 0` });
    }
    const [x, y] = toLocal(terrain.frame, wp.lat, wp.lon);
    const alt = datumTerrainM + wp.altRel;
    pts.push([x, y, alt]);
    const ground = heightAtLocal(terrain, x, y);
    if (ground === null) {
      issues.push({ index: i, kind: "out-of-bounds",
        text: `waypoint ${i + 1}: outside the terrain` });
    } else if (alt < ground + clearanceM) {
      issues.push({ index: i, kind: "waypoint-clearance",
        text: `waypoint ${i + 1}: ${(ground + clearanceM - alt).toFixed(1)} m below clearance` });
    }
  });

  for (let i = 1; i < pts.length; i++) {
    const [ax, ay, az] = pts[i - 1];
    const [bx, by, bz] = pts[i];
    const length = Math.hypot(bx - ax, by - ay, bz - az);
    if (length < 0.5) {
      issues.push({ index: i - 1, kind: "spacing",
        text: `waypoints ${i} and ${i + 1} closer than 0.5 m` });
      continue;
    }
    const steps = Math.max(1, Math.ceil(length));
    let worst = 0;
    for (let k = 1; k < steps; k++) {
      const f = k / steps;
      const ground = heightAtLocal(terrain, ax + (bx - ax) * f, ay + (by - ay) * f);
      if (ground === null) {
        issues.push({ index: i - 1, kind: "out-of-bounds",
          text: `leg ${i}: leaves the terrain` });
        worst = -1;
        break;
      }
      worst = Math.max(worst, ground + clearanceM - (az + (bz - az) * f));
    }
    if (worst > 0) {
      issues.push({ index: i - 1, kind: "segment-clearance",
        text: `leg ${i}: dips ${worst.toFixed(1)} m below clearance` });
    }
  }
  return issues;
}
