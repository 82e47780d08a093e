/**
 * Client session state: one entry per DetectionNotification, fed by server
 * messages and user actions, consumed by the renderer and the menus.
 *
 * Mirrors the server's review states: buttons enable only where the server
 * would accept the decision, volume edits stay local until Send Repair,
 * and at most one revision request is in flight per session (the send
 * button locks until the revised cloud and plan arrive).
 */

import { ChunkAssembler, type AssembledCloud } from "./chunks";
import {
  newVolume,
  toWire,
  type EditableVolume,
  type Vec3,
} from "./gizmo";
import {
  encodeClientMessage,
  parseServerMessage,
  type ClientMessage,
  type DetectionNotification,
  type GoalPoseMsg,
  type PlanSummaryMsg,
  type ServerMessage,
} from "./protocol";

export type ClientPhase =
  | "awaiting_review"
  | "modifying"
  | "revision_pending"
  | "navigating"
  | "executing"
  | "done"
  | "rejected";

export interface SessionView {
  id: number;
  notification: DetectionNotification;
  phase: ClientPhase;
  clouds: Map<number, AssembledCloud>;
  renderedRevision: number | null;
  goal: GoalPoseMsg | null;
  plans: Map<number, PlanSummaryMsg>;
  volumes: EditableVolume[];
  selectedVolume: number | null;
  sendLocked: boolean;
  toast: string | null;
}

export interface ButtonState {
  repair: boolean;
  modify: boolean;
  reject: boolean;
  sendRepair: boolean;
}

type Listener = () => void;

export class ReviewStore {
  readonly sessions = new Map<number, SessionView>();
  private assembler = new ChunkAssembler();
  private listeners: Listener[] = [];
  private sendFrame: (frame: string) => void;
  /** Transcript of validated outbound messages, newest last. */
  readonly outbox: ClientMessage[] = [];

  constructor(sendFrame: (frame: string) => void) {
    this.sendFrame = sendFrame;
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /**
   * Validate, apply the optimistic state change, then transmit. The state
   * must be updated before the frame leaves: a transport may deliver the
   * server's reply synchronously.
   */
  private send(msg: ClientMessage, before?: () => void): void {
    const frame = encodeClientMessage(msg); // throws if schema-invalid
    before?.();
    this.outbox.push(msg);
    this.sendFrame(frame);
  }

  // --- inbound ---

  handleFrame(raw: string): void {
    let msg: ServerMessage | null;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      console.error("dropping bad frame:", err);
      return;
    }
    if (msg !== null) {
      this.handleServer(msg);
    }
  }

  handleServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "detection": {
        if (!this.sessions.has(msg.session_id)) {
          this.sessions.set(msg.session_id, {
            id: msg.session_id,
            notification: msg,
            phase: "awaiting_review",
            clouds: new Map(),
            renderedRevision: null,
            goal: null,
            plans: new Map(),
            volumes: [],
            selectedVolume: null,
            sendLocked: false,
            toast: null,
          });
        }
        break;
      }
      case "cloud": {
        const done = this.assembler.add(msg);
        if (done) {
          const session = this.sessions.get(done.sessionId);
          if (session) {
            session.clouds.set(done.revision, done);
            // render only complete revisions, and never regress
            if (session.renderedRevision === null || done.revision > session.renderedRevision) {
              session.renderedRevision = done.revision;
            }
            this.maybeFinishRevision(session);
          }
        }
        break;
      }
      case "goal_pose": {
        const session = this.sessions.get(msg.session_id);
        if (session) {
          session.goal = msg;
        }
        break;
      }
      case "plan": {
        const session = this.sessions.get(msg.session_id);
        if (session) {
          session.plans.set(msg.revision, msg);
          this.maybeFinishRevision(session);
        }
        break;
      }
      case "status": {
        const session = this.sessions.get(msg.session_id);
        if (session) {
          session.phase = msg.phase;
        }
        break;
      }
      case "error": {
        // surface on the session being modified, else globally
        const active = [...this.sessions.values()].find(
          (s) => s.phase === "revision_pending" || s.phase === "modifying",
        );
        if (active) {
          active.toast = `${msg.code}: ${msg.detail}`;
          if (active.phase === "revision_pending") {
            active.phase = "modifying"; // let the user fix the volumes
            active.sendLocked = false;
          }
        } else {
          console.error("server error:", msg.code, msg.detail);
        }
        break;
      }
    }
    this.emit();
  }

  /** Revision pending resolves once both its cloud and plan have arrived. */
  private maybeFinishRevision(session: SessionView): void {
    if (session.phase !== "revision_pending" || session.clouds.size === 0) {
      return;
    }
    const next = Math.max(...session.clouds.keys());
    if (next > 0 && session.plans.has(next) && session.clouds.has(next)) {
      session.phase = "awaiting_review";
      session.sendLocked = false;
      session.volumes = [];
      session.selectedVolume = null;
    }
  }

  // --- user actions ---

  buttons(sessionId: number): ButtonState {
    const session = this.sessions.get(sessionId);
    const decisionOk = session?.phase === "awaiting_review";
    return {
      repair: !!decisionOk,
      modify: !!decisionOk,
      reject: !!decisionOk,
      sendRepair: session?.phase === "modifying" && !session.sendLocked,
    };
  }

  decide(sessionId: number, value: "repair" | "reject"): void {
    const session = this.sessions.get(sessionId);
    if (!session || !this.buttons(sessionId)[value]) {
      return; // disabled: no message leaves the client
    }
    this.send({ type: "decision", session_id: sessionId, value }, () => {
      if (value === "reject") {
        session.phase = "rejected";
      }
    });
    this.emit();
  }

  /** Modify opens the panel with the default red box on the surface. */
  startModify(sessionId: number): void {
    const session = this.sessions.get(sessionId);
    if (!session || !this.buttons(sessionId).modify) {
      return;
    }
    this.send({ type: "decision", session_id: sessionId, value: "modify" }, () => {
      session.phase = "modifying";
      const box = newVolume("box", this.surfaceCenter(session));
      session.volumes = [box];
      session.selectedVolume = box.id;
    });
    this.emit();
  }

  addVolume(sessionId: number, shape: EditableVolume["shape"]): void {
    const session = this.sessions.get(sessionId);
    if (!session || session.phase !== "modifying") {
      return;
    }
    const volume = newVolume(shape, this.surfaceCenter(session));
    session.volumes.push(volume);
    session.selectedVolume = volume.id;
    this.emit();
  }

  removeVolume(sessionId: number, volumeId: number): void {
    const session = this.sessions.get(sessionId);
    if (!session || session.phase !== "modifying") {
      return;
    }
    session.volumes = session.volumes.filter((v) => v.id !== volumeId);
    if (session.selectedVolume === volumeId) {
      session.selectedVolume = session.volumes.at(-1)?.id ?? null;
    }
    this.emit();
  }

  /** Edits are local: only Send Repair transmits. */
  updateVolume(sessionId: number, volume: EditableVolume): void {
    const session = this.sessions.get(sessionId);
    if (!session || session.phase !== "modifying") {
      return;
    }
    session.volumes = session.volumes.map((v) => (v.id === volume.id ? volume : v));
    this.emit();
  }

  sendRepairVolumes(sessionId: number): void {
    const session = this.sessions.get(sessionId);
    if (!session || !this.buttons(sessionId).sendRepair) {
      return;
    }
    const msg: ClientMessage = {
      type: "exclusions",
      session_id: sessionId,
      volumes: session.volumes.map(toWire),
    };
    this.send(msg, () => {
      session.phase = "revision_pending";
      session.sendLocked = true;
      session.toast = null;
    });
    this.emit();
  }

  renderedCloud(sessionId: number): AssembledCloud | null {
    const session = this.sessions.get(sessionId);
    if (!session || session.renderedRevision === null) {
      return null;
    }
    return session.clouds.get(session.renderedRevision) ?? null;
  }

  private surfaceCenter(session: SessionView): Vec3 {
    return [...session.notification.centroid];
  }
}
