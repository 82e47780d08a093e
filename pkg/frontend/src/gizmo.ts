/**
 * Exclusion volume editing model: translate / rotate / scale operations on
 * plain data, independent of the renderer. Orientations are unit
 * quaternions (w, x, y, z) matching the wire schema; non-positive scales
 * clamp at 1 mm and report it so the UI can warn.
 */

import type { VolumeWire } from "./protocol";

export type Quat = [number, number, number, number];
export type Vec3 = [number, number, number];

export const MIN_DIM = 0.001;

export interface EditableVolume {
  id: number;
  shape: "box" | "cylinder" | "sphere";
  position: Vec3;
  orientation: Quat;
  dims: number[];
}

export function qNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n < 1e-12) {
    throw new Error("quaternion norm vanishes");
  }
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export function qMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return qNormalize([
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ]);
}

export function qFromAxisAngle(axis: Vec3, angle: number): Quat {
  const n = Math.hypot(...axis);
  if (n < 1e-12) {
    throw new Error("rotation axis vanishes");
  }
  const s = Math.sin(angle / 2) / n;
  return qNormalize([Math.cos(angle / 2), axis[0] * s, axis[1] * s, axis[2] * s]);
}

let nextVolumeId = 1;

export function defaultDims(shape: EditableVolume["shape"]): number[] {
  switch (shape) {
    case "box":
      return [0.3, 0.2, 0.2];
    case "cylinder":
      return [0.1, 0.3];
    case "sphere":
      return [0.15];
  }
}

/** The Modification panel's starting volume: a box dropped on the surface. */
export function newVolume(
  shape: EditableVolume["shape"],
  center: Vec3,
): EditableVolume {
  return {
    id: nextVolumeId++,
    shape,
    position: [...center],
    orientation: [1, 0, 0, 0],
    dims: defaultDims(shape),
  };
}

export function translateVolume(v: EditableVolume, delta: Vec3): EditableVolume {
  return {
    ...v,
    position: [v.position[0] + delta[0], v.position[1] + delta[1], v.position[2] + delta[2]],
  };
}

/** Rotate about a world axis through the volume center. */
export function rotateVolume(v: EditableVolume, axis: Vec3, angle: number): EditableVolume {
  return { ...v, orientation: qMultiply(qFromAxisAngle(axis, angle), v.orientation) };
}

export interface ScaleResult {
  volume: EditableVolume;
  clamped: boolean;
}

/** Scale per-dimension; anything at or below zero clamps to MIN_DIM. */
export function scaleVolume(v: EditableVolume, factors: number[]): ScaleResult {
  let clamped = false;
  const dims = v.dims.map((d, i) => {
    const next = d * (factors[i % factors.length] ?? 1);
    if (next < MIN_DIM) {
      clamped = true;
      return MIN_DIM;
    }
    return next;
  });
  return { volume: { ...v, dims }, clamped };
}

export function resizeVolume(v: EditableVolume, dims: number[]): ScaleResult {
  let clamped = false;
  const next = dims.map((d) => {
    if (!(d >= MIN_DIM)) {
      clamped = true;
      return MIN_DIM;
    }
    return d;
  });
  return { volume: { ...v, dims: next }, clamped };
}

export function toWire(v: EditableVolume): VolumeWire {
  return {
    shape: v.shape,
    pose: {
      position: [...v.position],
      orientation: qNormalize(v.orientation),
    },
    dims: [...v.dims],
  };
}
