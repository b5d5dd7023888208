/**
 * Virtual-ball widget math. The big sphere's displacement is normalized so
 * the bounding sphere has radius 1 (x = right, y = up, z = forward); the
 * small arc carries yaw and camera-pitch inputs in [-1, 1].
 */

export type Vec3 = [number, number, number];

export const DEADZONE = 0.1;

export function magnitude(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

/** Radial projection onto the unit sphere when the raw pointer escapes it. */
export function clampBall(raw: Vec3): Vec3 {
  const r = magnitude(raw);
  if (r <= 1.0) return [...raw];
  return [raw[0] / r, raw[1] / r, raw[2] / r];
}

/** Post-deadzone deflection in [0, 1]; drives audio/visual push feedback. */
export function feedbackLevel(ball: Vec3, deadzone: number = DEADZONE): number {
  const r = magnitude(ball);
  if (r <= deadzone) return 0;
  return Math.min(1, (r - deadzone) / (1 - deadzone));
}

export function clampArc(value: number): number {
  return Math.max(-1, Math.min(1, value));
}
