/**
 * DOM panels: notification list, detected-item menu (scene image, plan
 * summary, Repair / Modify / Reject), and the modification panel with the
 * volume editor controls. Pure render-from-store; all state lives in
 * ReviewStore.
 */

import {
  rotateVolume,
  scaleVolume,
  translateVolume,
  type EditableVolume,
  type Vec3,
} from "./gizmo";
import type { ReviewStore, SessionView } from "./store";

const STEP = 0.02;
const ANGLE = Math.PI / 24;
const SCALE_UP = 1.1;
const SCALE_DOWN = 1 / 1.1;

export class Menu {
  private store: ReviewStore;
  private root: HTMLElement;
  private activeSession: number | null = null;
  onSelectSession: (id: number) => void = () => {};

  constructor(store: ReviewStore, root: HTMLElement) {
    this.store = store;
    this.root = root;
    store.onChange(() => this.render());
    this.render();
  }

  get selectedSession(): number | null {
    return this.activeSession;
  }

  selectSession(id: number): void {
    this.activeSession = id;
    this.onSelectSession(id);
    this.render();
  }

  setBanner(text: string | null): void {
    const banner = document.getElementById("banner");
    if (banner) {
      banner.textContent = text ?? "";
      banner.style.display = text ? "block" : "none";
    }
  }

  render(): void {
    const sessions = [...this.store.sessions.values()];
    this.root.innerHTML = "";
    this.root.appendChild(this.renderList(sessions));
    const active = this.activeSession !== null
      ? this.store.sessions.get(this.activeSession)
      : undefined;
    if (active) {
      this.root.appendChild(this.renderDetectedItem(active));
      if (active.phase === "modifying" || active.phase === "revision_pending") {
        this.root.appendChild(this.renderModificationPanel(active));
      }
    }
  }

  private renderList(sessions: SessionView[]): HTMLElement {
    const panel = el("div", "panel");
    panel.appendChild(el("h2", "", "Detected items"));
    if (sessions.length === 0) {
      panel.appendChild(el("p", "empty", "No detections yet."));
      return panel;
    }
    const list = el("ul", "detections");
    for (const session of sessions) {
      const item = el("li", session.id === this.activeSession ? "active" : "");
      const c = session.notification.centroid;
      item.textContent =
        `#${session.id} · ${session.notification.cluster_size} pts · ` +
        `(${c[0].toFixed(2)}, ${c[1].toFixed(2)}, ${c[2].toFixed(2)}) · ${session.phase}`;
      item.onclick = () => this.selectSession(session.id);
      list.appendChild(item);
    }
    panel.appendChild(list);
    return panel;
  }

  private renderDetectedItem(session: SessionView): HTMLElement {
    const panel = el("div", "panel");
    panel.appendChild(el("h2", "", `Detected item #${session.id}`));
    if (session.notification.image_uri) {
      const img = document.createElement("img");
      img.src = session.notification.image_uri;
      img.alt = "scene snapshot";
      img.className = "snapshot";
      panel.appendChild(img);
    }
    const plan = session.plans.get(Math.max(0, ...session.plans.keys()));
    if (plan) {
      const coverage = (plan.coverage_fraction * 100).toFixed(1);
      panel.appendChild(el(
        "p", "plan",
        `rev ${plan.revision}: ${plan.fixture_count} fixtures, ` +
        `${plan.reachable_count} reachable (${coverage}% coverage)`,
      ));
    }
    if (session.toast) {
      panel.appendChild(el("p", "toast", session.toast));
    }
    panel.appendChild(el("p", "phase", `state: ${session.phase}`));

    const buttons = this.store.buttons(session.id);
    const row = el("div", "buttons");
    row.appendChild(button("Repair", buttons.repair, () =>
      this.store.decide(session.id, "repair")));
    row.appendChild(button("Modify", buttons.modify, () =>
      this.store.startModify(session.id)));
    row.appendChild(button("Reject", buttons.reject, () =>
      this.store.decide(session.id, "reject")));
    panel.appendChild(row);
    return panel;
  }

  private renderModificationPanel(session: SessionView): HTMLElement {
    const panel = el("div", "panel");
    panel.appendChild(el("h2", "", "Modification"));
    const add = el("div", "buttons");
    for (const shape of ["box", "cylinder", "sphere"] as const) {
      add.appendChild(button(`+ ${shape}`, session.phase === "modifying", () =>
        this.store.addVolume(session.id, shape)));
    }
    panel.appendChild(add);

    for (const volume of session.volumes) {
      panel.appendChild(this.renderVolumeControls(session, volume));
    }

    const send = button(
      session.sendLocked ? "Waiting for revised plan…" : "Send Repair",
      this.store.buttons(session.id).sendRepair,
      () => this.store.sendRepairVolumes(session.id),
    );
    send.classList.add("send");
    panel.appendChild(send);
    return panel;
  }

  private renderVolumeControls(session: SessionView, volume: EditableVolume): HTMLElement {
    const box = el("div", "volume");
    const dims = volume.dims.map((d) => d.toFixed(3)).join(" x ");
    box.appendChild(el("h3", "", `${volume.shape} ${dims}`));
    const editable = session.phase === "modifying";
    const apply = (updated: EditableVolume) =>
      this.store.updateVolume(session.id, updated);

    const translate = el("div", "buttons");
    const axes: [string, Vec3][] = [
      ["x", [1, 0, 0]], ["y", [0, 1, 0]], ["z", [0, 0, 1]],
    ];
    for (const [name, axis] of axes) {
      translate.appendChild(button(`${name}+`, editable, () =>
        apply(translateVolume(volume, axis.map((v) => v * STEP) as Vec3))));
      translate.appendChild(button(`${name}-`, editable, () =>
        apply(translateVolume(volume, axis.map((v) => -v * STEP) as Vec3))));
    }
    box.appendChild(translate);

    const rotate = el("div", "buttons");
    for (const [name, axis] of axes) {
      rotate.appendChild(button(`r${name}+`, editable, () =>
        apply(rotateVolume(volume, axis, ANGLE))));
      rotate.appendChild(button(`r${name}-`, editable, () =>
        apply(rotateVolume(volume, axis, -ANGLE))));
    }
    box.appendChild(rotate);

    const scale = el("div", "buttons");
    scale.appendChild(button("bigger", editable, () => {
      apply(scaleVolume(volume, [SCALE_UP]).volume);
    }));
    scale.appendChild(button("smaller", editable, () => {
      const result = scaleVolume(volume, [SCALE_DOWN]);
      if (result.clamped) {
        this.setBanner("volume clamped at 1 mm");
        setTimeout(() => this.setBanner(null), 1500);
      }
      apply(result.volume);
    }));
    scale.appendChild(button("remove", editable, () =>
      this.store.removeVolume(session.id, volume.id)));
    box.appendChild(scale);
    return box;
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function button(label: string, enabled: boolean, onClick: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.textContent = label;
  node.disabled = !enabled;
  node.onclick = onClick;
  return node;
}
