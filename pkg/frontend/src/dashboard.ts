/** Telemetry panels plus connection/phase readouts and Ack notifications. */

import { FLIGHT_PHASES, MISSION_STATES, type Telemetry } from "./codec.js";
import type { Notification } from "./session.js";

export interface PanelValues {
  groundDistanceM: number;
  groundSpeedMps: number;
  altitudeRelM: number;
  verticalSpeedMps: number;
  gps: number;
  battery: number;
}

export function panelValues(t: Telemetry, userXY: [number, number],
  vehicleXY: [number, number]): PanelValues {
  return {
    groundDistanceM: Math.hypot(vehicleXY[0] - userXY[0], vehicleXY[1] - userXY[1]),
    groundSpeedMps: Math.hypot(t.vEast, t.vNorth),
    altitudeRelM: t.altRel,
    verticalSpeedMps: t.vUp,
    gps: t.gps,
    battery: t.battery,
  };
}

export class Dashboard {
  private fields = new Map<string, HTMLElement>();

  constructor(root: HTMLElement) {
    const rows: [string, string][] = [
      ["distance", "ground distance"],
      ["gspeed", "ground speed"],
      ["alt", "altitude"],
      ["vspeed", "vertical speed"],
      ["gps", "GPS"],
      ["battery", "battery"],
      ["phase", "phase"],
      ["mission", "mission"],
      ["link", "link"],
    ];
    for (const [id, label] of rows) {
      const row = document.createElement("div");
      row.className = "panel-row";
      const name = document.createElement("span");
      name.textContent = label;
      const value = document.createElement("strong");
      value.id = `panel-${id}`;
      row.append(name, value);
      root.appendChild(row);
      this.fields.set(id, value);
    }
  }

  private set(id: string, text: string): void {
    const el = this.fields.get(id);
    if (el) el.textContent = text;
  }

  update(t: Telemetry | null, values: PanelValues | null, link: string): void {
    this.set("link", link);
    if (!t || !values) return;
    this.set("distance", `${values.groundDistanceM.toFixed(1)} m`);
    this.set("gspeed", `${values.groundSpeedMps.toFixed(1)} m/s`);
    this.set("alt", `${values.altitudeRelM.toFixed(1)} m`);
    this.set("vspeed", `${values.verticalSpeedMps.toFixed(1)} m/s`);
    this.set("gps", `${values.gps}/5`);
    this.set("battery", `${values.battery}%`);
    this.set("phase", FLIGHT_PHASES[t.phase] ?? `#${t.phase}`);
    this.set("mission", `${MISSION_STATES[t.missionState] ?? "?"} @${t.missionIndex}`);
  }
}

export function renderNotifications(root: HTMLElement,
  notifications: Notification[]): void {
  root.innerHTML = "";
  for (const note of notifications.slice(-4)) {
    const div = document.createElement("div");
    div.className = "notice";
    div.textContent = note.text;
    root.appendChild(div);
  }
}
