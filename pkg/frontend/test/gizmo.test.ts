import { describe, expect, it } from "vitest";
import {
  MIN_DIM,
  newVolume,
  qFromAxisAngle,
  qMultiply,
  rotateVolume,
  scaleVolume,
  resizeVolume,
  toWire,
  translateVolume,
} from "../src/gizmo";
import { validateClientMessage } from "../src/protocol";

describe("quaternions", () => {
  it("axis-angle quaternions are unit", () => {
    const q = qFromAxisAngle([0, 0, 1], Math.PI / 3);
    expect(Math.hypot(...q)).toBeCloseTo(1, 12);
  });

  it("multiplication stays unit under long chains", () => {
    let q: [number, number, number, number] = [1, 0, 0, 0];
    for (let i = 0; i < 500; i++) {
      q = qMultiply(q, qFromAxisAngle([1, 1, 0.3], 0.1));
    }
    expect(Math.hypot(...q)).toBeCloseTo(1, 9);
  });
});

describe("volume editing", () => {
  it("translate moves the center", () => {
    const v = newVolume("box", [1, 2, 3]);
    const moved = translateVolume(v, [0.1, -0.2, 0]);
    expect(moved.position[0]).toBeCloseTo(1.1);
    expect(moved.position[1]).toBeCloseTo(1.8);
    expect(moved.dims).toEqual(v.dims);
  });

  it("rotate changes orientation, not dims or position", () => {
    const v = newVolume("box", [0, 0, 0]);
    const rotated = rotateVolume(v, [0, 0, 1], Math.PI / 4);
    expect(rotated.orientation[0]).toBeCloseTo(Math.cos(Math.PI / 8));
    expect(rotated.orientation[3]).toBeCloseTo(Math.sin(Math.PI / 8));
    expect(rotated.position).toEqual(v.position);
    expect(rotated.dims).toEqual(v.dims);
  });

  it("four quarter turns compose to identity", () => {
    let v = newVolume("box", [0, 0, 0]);
    for (let i = 0; i < 4; i++) {
      v = rotateVolume(v, [0, 1, 0], Math.PI / 2);
    }
    expect(Math.abs(v.orientation[0])).toBeCloseTo(1, 9);
  });

  it("scale multiplies dims", () => {
    const v = newVolume("box", [0, 0, 0]);
    const { volume, clamped } = scaleVolume(v, [2]);
    expect(clamped).toBe(false);
    expect(volume.dims[0]).toBeCloseTo(v.dims[0] * 2);
  });

  it("non-positive scale clamps at 1 mm and reports it", () => {
    const v = newVolume("sphere", [0, 0, 0]);
    const { volume, clamped } = scaleVolume(v, [0]);
    expect(clamped).toBe(true);
    expect(volume.dims[0]).toBe(MIN_DIM);
    const resized = resizeVolume(v, [-5]);
    expect(resized.clamped).toBe(true);
    expect(resized.volume.dims[0]).toBe(MIN_DIM);
  });

  it("edits never mutate the input volume", () => {
    const v = newVolume("box", [0, 0, 0]);
    const dims = [...v.dims];
    translateVolume(v, [1, 1, 1]);
    rotateVolume(v, [1, 0, 0], 1);
    scaleVolume(v, [3]);
    expect(v.position).toEqual([0, 0, 0]);
    expect(v.dims).toEqual(dims);
    expect(v.orientation).toEqual([1, 0, 0, 0]);
  });
});

describe("wire conversion", () => {
  it("produces schema-valid volumes for every shape", () => {
    for (const shape of ["box", "cylinder", "sphere"] as const) {
      const v = rotateVolume(newVolume(shape, [1, 2, 3]), [0.3, 1, 0.2], 0.7);
      const problems = validateClientMessage({
        type: "exclusions",
        session_id: 1,
        volumes: [toWire(v)],
      });
      expect(problems).toEqual([]);
    }
  });

  it("keeps dims arity per shape", () => {
    expect(toWire(newVolume("box", [0, 0, 0])).dims.length).toBe(3);
    expect(toWire(newVolume("cylinder", [0, 0, 0])).dims.length).toBe(2);
    expect(toWire(newVolume("sphere", [0, 0, 0])).dims.length).toBe(1);
  });
});
