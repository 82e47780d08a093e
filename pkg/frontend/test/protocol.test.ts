import { describe, expect, it } from "vitest";
import {
  encodeClientMessage,
  parseServerMessage,
  validateClientMessage,
  type DecisionMsg,
  type ExclusionSetMsg,
} from "../src/protocol";

const box = {
  shape: "box" as const,
  pose: {
    position: [1, 0, 0.5] as [number, number, number],
    orientation: [1, 0, 0, 0] as [number, number, number, number],
  },
  dims: [0.3, 0.2, 0.4],
};

describe("parseServerMessage", () => {
  it("parses a detection", () => {
    const msg = parseServerMessage(JSON.stringify({
      type: "detection", session_id: 1, cluster_size: 42,
      centroid: [1, 2, 3], image_uri: "/assets/x.png",
    }));
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("detection");
  });

  it("returns null for unknown types", () => {
    expect(parseServerMessage('{"type": "telemetry"}')).toBeNull();
  });

  it("throws on garbage", () => {
    expect(() => parseServerMessage("{nope")).toThrow();
    expect(() => parseServerMessage('"str"')).toThrow();
    expect(() => parseServerMessage('{"type": "status", "session_id": 1, "phase": "???"}')).toThrow();
  });

  it("rejects out-of-range chunk seq", () => {
    expect(() => parseServerMessage(JSON.stringify({
      type: "cloud", session_id: 1, revision: 0, seq: 2, total: 2, points: [],
    }))).toThrow();
  });
});

describe("validateClientMessage", () => {
  it("accepts a decision", () => {
    const msg: DecisionMsg = { type: "decision", session_id: 3, value: "repair" };
    expect(validateClientMessage(msg)).toEqual([]);
    expect(JSON.parse(encodeClientMessage(msg))).toEqual(msg);
  });

  it("accepts a well-formed exclusion set", () => {
    const msg: ExclusionSetMsg = { type: "exclusions", session_id: 1, volumes: [box] };
    expect(validateClientMessage(msg)).toEqual([]);
  });

  it("accepts an empty exclusion set", () => {
    expect(validateClientMessage({
      type: "exclusions", session_id: 1, volumes: [],
    })).toEqual([]);
  });

  it("rejects non-positive dims", () => {
    const bad = { ...box, dims: [-1, 1, 1] };
    const problems = validateClientMessage({
      type: "exclusions", session_id: 1, volumes: [bad],
    });
    expect(problems.length).toBeGreaterThan(0);
  });

  it("rejects wrong dims arity", () => {
    const bad = { ...box, shape: "cylinder" as const };
    expect(validateClientMessage({
      type: "exclusions", session_id: 1, volumes: [bad],
    })).not.toEqual([]);
  });

  it("rejects non-unit orientation", () => {
    const bad = {
      ...box,
      pose: { ...box.pose, orientation: [2, 0, 0, 0] as [number, number, number, number] },
    };
    expect(validateClientMessage({
      type: "exclusions", session_id: 1, volumes: [bad],
    })).not.toEqual([]);
  });

  it("encode refuses invalid messages", () => {
    expect(() => encodeClientMessage({
      type: "decision", session_id: 1.5, value: "repair",
    })).toThrow();
  });
});
