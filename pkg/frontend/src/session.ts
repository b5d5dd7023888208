/**
 * Client-side session rules.
 *
 * ControlStream decides which widget frames leave the client:
 *  - at most one ControlInput per 50 ms while the widget is engaged,
 *  - release always emits one trailing zero-input frame before silence,
 *  - with the safety toggle on, no ControlInput frames leave at all (a final
 *    zero goes out as the toggle engages, then silence).
 */

import type { Ack, ControlInput, Message, Telemetry } from "./codec.js";
import type { Vec3 } from "./ball.js";

export interface ControlSample {
  frame: 0 | 1;
  ball: Vec3;
  arc: [number, number];
  engaged: boolean;
}

export const ZERO_SAMPLE: ControlSample = {
  frame: 1,
  ball: [0, 0, 0],
  arc: [0, 0],
  engaged: false,
};

function frameOf(sample: ControlSample): ControlInput {
  return {
    kind: "control_input",
    frame: sample.frame,
    ball: [...sample.ball],
    arc: [...sample.arc],
  };
}

function zeroFrame(frame: 0 | 1): ControlInput {
  return { kind: "control_input", frame, ball: [0, 0, 0], arc: [0, 0] };
}

export class ControlStream {
  private lastSentMs = -Infinity;
  private wasEngaged = false;
  private lastFrameSel: 0 | 1 = 1;
  overrideActive = false;

  constructor(private minIntervalMs = 50) {}

  /** Feed the current widget sample; returns the frames to transmit now. */
  update(sample: ControlSample, nowMs: number): ControlInput[] {
    this.lastFrameSel = sample.frame;
    if (this.overrideActive) {
      this.wasEngaged = false;
      return [];
    }
    if (sample.engaged) {
      if (nowMs - this.lastSentMs < this.minIntervalMs) return [];
      this.lastSentMs = nowMs;
      this.wasEngaged = true;
      return [frameOf(sample)];
    }
    if (this.wasEngaged) {
      // release safety: the zero command is never rate-limited away
      this.wasEngaged = false;
      this.lastSentMs = nowMs;
      return [zeroFrame(sample.frame)];
    }
    return [];
  }

  /** Toggle the safety override; returns frames to transmit before silence. */
  setOverride(active: boolean): ControlInput[] {
    if (active && !this.overrideActive) {
      this.overrideActive = true;
      if (this.wasEngaged) {
        this.wasEngaged = false;
        return [zeroFrame(this.lastFrameSel)];
      }
      return [];
    }
    this.overrideActive = active;
    return [];
  }
}

export type ConnectionState = "connecting" | "open" | "closed";

export interface Notification {
  refTag: number;
  code: number;
  text: string;
}

const ACK_TEXT = ["ok", "invalid transition", "validation failed", "out of range"];
const ACKED_COMMANDS: Record<number, string> = {
  3: "waypoint upload",
  4: "mission command",
  5: "vehicle command",
  6: "safety override",
};

/** Last-write-wins view of the server state plus surfaced Ack errors. */
export class SessionState {
  connection: ConnectionState = "connecting";
  telemetry: Telemetry | null = null;
  notifications: Notification[] = [];

  ingest(message: Message): void {
    if (message.kind === "telemetry") {
      this.telemetry = message; // frames are self-contained; gaps are fine
    } else if (message.kind === "ack") {
      this.ingestAck(message);
    }
  }

  private ingestAck(ack: Ack): void {
    if (ack.code === 0) return;
    const what = ACKED_COMMANDS[ack.refTag] ?? `command 0x${ack.refTag.toString(16)}`;
    this.notifications.push({
      refTag: ack.refTag,
      code: ack.code,
      text: `${what}: ${ACK_TEXT[ack.code] ?? "error"}`,
    });
    if (this.notifications.length > 8) this.notifications.shift();
  }
}
