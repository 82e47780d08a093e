import { Menu } from "./menu";
import { ReviewSocket } from "./socket";
import { ReviewStore } from "./store";
import { Viewer } from "./viewer";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const sidebar = document.getElementById("sidebar") as HTMLElement;

const viewer = new Viewer(canvas);
const socket = new ReviewSocket({
  onFrame: (raw) => store.handleFrame(raw),
  onStateChange: (state) => {
    menu.setBanner(state === "connected" ? null : `connection ${state}…`);
  },
});
const store = new ReviewStore((frame) => socket.send(frame));
const menu = new Menu(store, sidebar);

menu.onSelectSession = (id) => {
  const session = store.sessions.get(id);
  if (session) {
    viewer.lookAt(session.notification.centroid);
  }
  refresh3d();
};

function refresh3d(): void {
  const id = menu.selectedSession;
  if (id === null) {
    return;
  }
  const session = store.sessions.get(id);
  if (!session) {
    return;
  }
  const cloud = store.renderedCloud(id);
  if (cloud) {
    const previous = cloud.revision > 0
      ? session.clouds.get(cloud.revision - 1) ?? null
      : null;
    viewer.showCloud(cloud, previous);
  }
  viewer.showGoal(session.goal);
  viewer.showVolumes(session.volumes, session.selectedVolume);
}

store.onChange(refresh3d);

function resize(): void {
  viewer.setSize(canvas.clientWidth, canvas.clientHeight);
}
window.addEventListener("resize", resize);
resize();

socket.connect();
