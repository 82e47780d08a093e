/**
 * Wire protocol types and validation, mirroring the server schema verbatim
 * (field names are normative). Every outbound message is validated against
 * these rules before send; inbound frames are parsed defensively.
 */

export interface DetectionNotification {
  type: "detection";
  session_id: number;
  cluster_size: number;
  centroid: [number, number, number];
  image_uri: string;
}

export interface CloudChunkMsg {
  type: "cloud";
  session_id: number;
  revision: number;
  seq: number;
  total: number;
  points: [number, number, number][];
  colors?: [number, number, number][];
}

export interface GoalPoseMsg {
  type: "goal_pose";
  session_id: number;
  position: [number, number, number];
  yaw: number;
}

export interface PlanSummaryMsg {
  type: "plan";
  session_id: number;
  revision: number;
  fixture_count: number;
  reachable_count: number;
  coverage_fraction: number;
  spacing: number;
  offset: number;
}

export interface ExecutionStatusMsg {
  type: "status";
  session_id: number;
  phase: "navigating" | "executing" | "done";
}

export interface ErrorMsg {
  type: "error";
  code: string;
  detail: string;
}

export interface DecisionMsg {
  type: "decision";
  session_id: number;
  value: "repair" | "modify" | "reject";
}

export interface VolumeWire {
  shape: "box" | "cylinder" | "sphere";
  pose: {
    position: [number, number, number];
    orientation: [number, number, number, number];
  };
  dims: number[];
}

export interface ExclusionSetMsg {
  type: "exclusions";
  session_id: number;
  volumes: VolumeWire[];
}

export type ServerMessage =
  | DetectionNotification
  | CloudChunkMsg
  | GoalPoseMsg
  | PlanSummaryMsg
  | ExecutionStatusMsg
  | ErrorMsg;

export type ClientMessage = DecisionMsg | ExclusionSetMsg;

const DIMS_ARITY: Record<VolumeWire["shape"], number> = {
  box: 3,
  cylinder: 2,
  sphere: 1,
};

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isVec(v: unknown, n: number): boolean {
  return Array.isArray(v) && v.length === n && v.every(isFiniteNumber);
}

/**
 * Parse one inbound frame. Returns null for unknown message types (forward
 * compatibility); throws on frames that are not valid protocol objects.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    throw new Error("malformed frame: not json");
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("malformed frame: not an object");
  }
  const msg = obj as Record<string, unknown>;
  switch (msg.type) {
    case "detection":
      if (!isFiniteNumber(msg.session_id) || !isFiniteNumber(msg.cluster_size) ||
          !isVec(msg.centroid, 3) || typeof msg.image_uri !== "string") {
        throw new Error("malformed detection");
      }
      return msg as unknown as DetectionNotification;
    case "cloud": {
      if (!isFiniteNumber(msg.session_id) || !isFiniteNumber(msg.revision) ||
          !isFiniteNumber(msg.seq) || !isFiniteNumber(msg.total) ||
          !Array.isArray(msg.points)) {
        throw new Error("malformed cloud chunk");
      }
      const chunk = msg as unknown as CloudChunkMsg;
      if (chunk.seq < 0 || chunk.seq >= chunk.total) {
        throw new Error("cloud chunk seq out of range");
      }
      return chunk;
    }
    case "goal_pose":
      if (!isFiniteNumber(msg.session_id) || !isVec(msg.position, 3) ||
          !isFiniteNumber(msg.yaw)) {
        throw new Error("malformed goal_pose");
      }
      return msg as unknown as GoalPoseMsg;
    case "plan":
      if (!isFiniteNumber(msg.session_id) || !isFiniteNumber(msg.revision) ||
          !isFiniteNumber(msg.fixture_count) || !isFiniteNumber(msg.reachable_count) ||
          !isFiniteNumber(msg.coverage_fraction) || !isFiniteNumber(msg.spacing) ||
          !isFiniteNumber(msg.offset)) {
        throw new Error("malformed plan");
      }
      return msg as unknown as PlanSummaryMsg;
    case "status":
      if (!isFiniteNumber(msg.session_id) ||
          !["navigating", "executing", "done"].includes(msg.phase as string)) {
        throw new Error("malformed status");
      }
      return msg as unknown as ExecutionStatusMsg;
    case "error":
      if (typeof msg.code !== "string" || typeof msg.detail !== "string") {
        throw new Error("malformed error");
      }
      return msg as unknown as ErrorMsg;
    default:
      return null;
  }
}

/**
 * Client-side schema validation, mirroring the server's decode rules.
 * Returns a list of violations; empty means the message may be sent.
 */
export function validateClientMessage(msg: ClientMessage): string[] {
  const problems: string[] = [];
  if (!Number.isInteger(msg.session_id)) {
    problems.push("session_id must be an integer");
  }
  if (msg.type === "decision") {
    if (!["repair", "modify", "reject"].includes(msg.value)) {
      problems.push(`unknown decision value ${String(msg.value)}`);
    }
    return problems;
  }
  if (msg.type === "exclusions") {
    msg.volumes.forEach((v, i) => {
      const arity = DIMS_ARITY[v.shape];
      if (arity === undefined) {
        problems.push(`volume ${i}: unknown shape ${String(v.shape)}`);
        return;
      }
      if (!isVec(v.pose.position, 3)) {
        problems.push(`volume ${i}: position must be [x, y, z]`);
      }
      if (!isVec(v.pose.orientation, 4)) {
        problems.push(`volume ${i}: orientation must be [w, x, y, z]`);
      } else {
        const n = Math.hypot(...v.pose.orientation);
        if (Math.abs(n - 1) > 1e-6) {
          problems.push(`volume ${i}: orientation norm ${n} is not 1`);
        }
      }
      if (v.dims.length !== arity) {
        problems.push(`volume ${i}: ${v.shape} takes ${arity} dims`);
      }
      if (!v.dims.every((d) => isFiniteNumber(d) && d > 0)) {
        problems.push(`volume ${i}: dims must be positive`);
      }
    });
    return problems;
  }
  problems.push(`unknown client message type`);
  return problems;
}

export function encodeClientMessage(msg: ClientMessage): string {
  const problems = validateClientMessage(msg);
  if (problems.length > 0) {
    throw new Error(`refusing to send invalid message: ${problems.join("; ")}`);
  }
  return JSON.stringify(msg);
}
