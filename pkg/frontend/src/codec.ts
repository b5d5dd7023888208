/**
 * Binary message codec: little-endian frames whose first byte is the type
 * tag. Layouts must stay byte-identical to the server codec; the shared
 * fixtures in golden/protocol_vectors.json pin both sides.
 */

export const TAG_TELEMETRY = 0x01;
export const TAG_CONTROL_INPUT = 0x02;
export const TAG_WAYPOINT_UPLOAD = 0x03;
export const TAG_MISSION_COMMAND = 0x04;
export const TAG_VEHICLE_COMMAND = 0x05;
export const TAG_SAFETY_OVERRIDE = 0x06;
export const TAG_USER_POSE = 0x07;
export const TAG_ACK = 0x08;

export const FLIGHT_PHASES = [
  "Grounded", "TakingOff", "Hovering", "Manual", "Mission",
  "ReturningHome", "Landing", "EmergencyStopped", "Crashed",
] as const;

export const MISSION_STATES = [
  "Idle", "Uploaded", "Running", "Paused", "Completed", "Aborted",
] as const;

export const MISSION_ACTIONS = ["start", "pause", "resume", "abort"] as const;
export const VEHICLE_ACTIONS = ["takeoff", "land", "return-home", "e-stop"] as const;
export const ACK_CODES = ["ok", "invalid-transition", "validation-failed",
  "out-of-range"] as const;

export interface Telemetry {
  kind: "telemetry";
  seq: number;
  simTimeMs: number;
  lat: number;
  lon: number;
  altWgs84: number;
  altRel: number;
  vEast: number;
  vNorth: number;
  vUp: number;
  yaw: number;
  gimbalPitch: number;
  battery: number;
  gps: number;
  phase: number;
  missionState: number;
  missionIndex: number;
}

export interface ControlInput {
  kind: "control_input";
  frame: 0 | 1; // 0 drone-centric, 1 user-centric
  ball: [number, number, number];
  arc: [number, number];
}

export interface WaypointWire {
  lat: number;
  lon: number;
  altRel: number;
  heading: number;
  camPitch: number;
  camera: boolean;
}

export interface WaypointUpload {
  kind: "waypoint_upload";
  waypoints: WaypointWire[];
}

export interface MissionCommand {
  kind: "mission_command";
  action: number;
}

export interface VehicleCommand {
  kind: "vehicle_command";
  action: number;
}

export interface SafetyOverride {
  kind: "safety_override";
  active: boolean;
}

export interface UserPose {
  kind: "user_pose";
  lat: number;
  lon: number;
  alt: number;
  heading: number;
}

export interface Ack {
  kind: "ack";
  refTag: number;
  code: number;
}

export type Message =
  | Telemetry
  | ControlInput
  | WaypointUpload
  | MissionCommand
  | VehicleCommand
  | SafetyOverride
  | UserPose
  | Ack;

export class DecodeError extends Error {}

const WAYPOINT_ENTRY_SIZE = 29;

export function encode(m: Message): Uint8Array {
  switch (m.kind) {
    case "telemetry": {
      const view = new DataView(new ArrayBuffer(66));
      view.setUint8(0, TAG_TELEMETRY);
      view.setUint32(1, m.seq, true);
      view.setBigUint64(5, BigInt(m.simTimeMs), true);
      view.setFloat64(13, m.lat, true);
      view.setFloat64(21, m.lon, true);
      view.setFloat64(29, m.altWgs84, true);
      view.setFloat32(37, m.altRel, true);
      view.setFloat32(41, m.vEast, true);
      view.setFloat32(45, m.vNorth, true);
      view.setFloat32(49, m.vUp, true);
      view.setFloat32(53, m.yaw, true);
      view.setFloat32(57, m.gimbalPitch, true);
      view.setUint8(61, m.battery);
      view.setUint8(62, m.gps);
      view.setUint8(63, m.phase);
      view.setUint8(64, m.missionState);
      view.setUint8(65, m.missionIndex);
      return new Uint8Array(view.buffer);
    }
    case "control_input": {
      const view = new DataView(new ArrayBuffer(22));
      view.setUint8(0, TAG_CONTROL_INPUT);
      view.setUint8(1, m.frame);
      view.setFloat32(2, m.ball[0], true);
      view.setFloat32(6, m.ball[1], true);
      view.setFloat32(10, m.ball[2], true);
      view.setFloat32(14, m.arc[0], true);
      view.setFloat32(18, m.arc[1], true);
      return new Uint8Array(view.buffer);
    }
    case "waypoint_upload": {
      const n = m.waypoints.length;
      if (n < 1 || n > 99) throw new DecodeError(`waypoint count ${n} out of 1..99`);
      const view = new DataView(new ArrayBuffer(2 + n * WAYPOINT_ENTRY_SIZE));
      view.setUint8(0, TAG_WAYPOINT_UPLOAD);
      view.setUint8(1, n);
      m.waypoints.forEach((wp, i) => {
        const off = 2 + i * WAYPOINT_ENTRY_SIZE;
        view.setFloat64(off, wp.lat, true);
        view.setFloat64(off + 8, wp.lon, true);
        view.setFloat32(off + 16, wp.altRel, true);
        view.setFloat32(off + 20, wp.heading, true);
        view.setFloat32(off + 24, wp.camPitch, true);
        view.setUint8(off + 28, wp.camera ? 1 : 0);
      });
      return new Uint8Array(view.buffer);
    }
    case "mission_command":
      return Uint8Array.of(TAG_MISSION_COMMAND, m.action);
    case "vehicle_command":
      return Uint8Array.of(TAG_VEHICLE_COMMAND, m.action);
    case "safety_override":
      return Uint8Array.of(TAG_SAFETY_OVERRIDE, m.active ? 1 : 0);
    case "user_pose": {
      const view = new DataView(new ArrayBuffer(29));
      view.setUint8(0, TAG_USER_POSE);
      view.setFloat64(1, m.lat, true);
      view.setFloat64(9, m.lon, true);
      view.setFloat64(17, m.alt, true);
      view.setFloat32(25, m.heading, true);
      return new Uint8Array(view.buffer);
    }
    case "ack":
      return Uint8Array.of(TAG_ACK, m.refTag, m.code);
  }
}

function expectLength(data: Uint8Array, n: number): void {
  if (data.length < n) throw new DecodeError(`frame truncated: ${data.length} < ${n}`);
  if (data.length > n) throw new DecodeError(`trailing bytes: ${data.length} > ${n}`);
}

export function decode(data: Uint8Array): Message {
  if (data.length === 0) throw new DecodeError("empty frame");
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  switch (data[0]) {
    case TAG_TELEMETRY: {
      expectLength(data, 66);
      return {
        kind: "telemetry",
        seq: view.getUint32(1, true),
        simTimeMs: Number(view.getBigUint64(5, true)),
        lat: view.getFloat64(13, true),
        lon: view.getFloat64(21, true),
        altWgs84: view.getFloat64(29, true),
        altRel: view.getFloat32(37, true),
        vEast: view.getFloat32(41, true),
        vNorth: view.getFloat32(45, true),
        vUp: view.getFloat32(49, true),
        yaw: view.getFloat32(53, true),
        gimbalPitch: view.getFloat32(57, true),
        battery: view.getUint8(61),
        gps: view.getUint8(62),
        phase: view.getUint8(63),
        missionState: view.getUint8(64),
        missionIndex: view.getUint8(65),
      };
    }
    case TAG_CONTROL_INPUT: {
      expectLength(data, 22);
      const frame = view.getUint8(1);
      if (frame > 1) throw new DecodeError(`unknown control frame ${frame}`);
      return {
        kind: "control_input",
        frame: frame as 0 | 1,
        ball: [view.getFloat32(2, true), view.getFloat32(6, true),
          view.getFloat32(10, true)],
        arc: [view.getFloat32(14, true), view.getFloat32(18, true)],
      };
    }
    case TAG_WAYPOINT_UPLOAD: {
      if (data.length < 2) throw new DecodeError("waypoint upload missing header");
      const n = view.getUint8(1);
      if (n < 1 || n > 99) throw new DecodeError(`waypoint count ${n} out of 1..99`);
      expectLength(data, 2 + n * WAYPOINT_ENTRY_SIZE);
      const waypoints: WaypointWire[] = [];
      for (let i = 0; i < n; i++) {
        const off = 2 + i * WAYPOINT_ENTRY_SIZE;
        const flags = view.getUint8(off + 28);
        if (flags > 1) throw new DecodeError(`waypoint ${i} reserved flags set`);
        waypoints.push({
          lat: view.getFloat64(off, true),
          lon: view.getFloat64(off + 8, true),
          altRel: view.getFloat32(off + 16, true),
          heading: view.getFloat32(off + 20, true),
          camPitch: view.getFloat32(off + 24, true),
          camera: flags === 1,
        });
      }
      return { kind: "waypoint_upload", waypoints };
    }
    case TAG_MISSION_COMMAND: {
      expectLength(data, 2);
      if (data[1] > 3) throw new DecodeError(`unknown mission action ${data[1]}`);
      return { kind: "mission_command", action: data[1] };
    }
    case TAG_VEHICLE_COMMAND: {
      expectLength(data, 2);
      if (data[1] > 3) throw new DecodeError(`unknown vehicle action ${data[1]}`);
      return { kind: "vehicle_command", action: data[1] };
    }
    case TAG_SAFETY_OVERRIDE: {
      expectLength(data, 2);
      if (data[1] > 1) throw new DecodeError(`override flag must be 0/1`);
      return { kind: "safety_override", active: data[1] === 1 };
    }
    case TAG_USER_POSE: {
      expectLength(data, 29);
      return {
        kind: "user_pose",
        lat: view.getFloat64(1, true),
        lon: view.getFloat64(9, true),
        alt: view.getFloat64(17, true),
        heading: view.getFloat32(25, true),
      };
    }
    case TAG_ACK: {
      expectLength(data, 3);
      if (data[1] < 1 || data[1] > 8) throw new DecodeError("ack references unknown tag");
      if (data[2] > 3) throw new DecodeError(`unknown ack code ${data[2]}`);
      return { kind: "ack", refTag: data[1], code: data[2] };
    }
    default:
      throw new DecodeError(`unknown message tag 0x${data[0].toString(16)}`);
  }
}

export function toHex(data: Uint8Array): string {
  return Array.from(data, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function fromHex(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}
