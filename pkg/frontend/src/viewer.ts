/**
 * Three.js scene: point clouds (current revision, removed points ghosted),
 * the base goal marker, and the exclusion volume meshes. A free-orbit
 * camera stands in for walking around the hologram.
 */

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { AssembledCloud } from "./chunks";
import type { EditableVolume } from "./gizmo";
import type { GoalPoseMsg } from "./protocol";

const VOLUME_COLOR = 0xd43f3f;
const VOLUME_SELECTED = 0xff8040;
const GHOST_COLOR = 0x666666;

export class Viewer {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private controls: OrbitControls;
  private cloudObject: THREE.Points | null = null;
  private ghostObject: THREE.Points | null = null;
  private goalObject: THREE.Object3D | null = null;
  private volumeObjects = new Map<number, THREE.Mesh>();

  constructor(canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(55, 1, 0.01, 100);
    this.camera.up.set(0, 0, 1); // world z is up
    this.camera.position.set(1.0, 1.0, 1.2);
    this.controls = new OrbitControls(this.camera, canvas);
    this.scene.background = new THREE.Color(0x14161a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    const sun = new THREE.DirectionalLight(0xffffff, 0.8);
    sun.position.set(1, 2, 3);
    this.scene.add(sun);
    this.scene.add(new THREE.GridHelper(10, 20, 0x333944, 0x23272e).rotateX(Math.PI / 2));
    this.animate();
  }

  setSize(width: number, height: number): void {
    this.renderer.setSize(width, height, false);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  lookAt(center: [number, number, number]): void {
    this.controls.target.set(...center);
    this.camera.position.set(center[0] - 1.6, center[1] - 1.2, center[2] + 0.9);
  }

  /** Show a cloud; `previous` points missing from it render as gray ghosts. */
  showCloud(cloud: AssembledCloud, previous: AssembledCloud | null): void {
    if (this.cloudObject) {
      this.scene.remove(this.cloudObject);
      this.cloudObject.geometry.dispose();
    }
    this.cloudObject = makePoints(cloud.points, cloud.colors, 0.008, 1.0);
    this.scene.add(this.cloudObject);

    if (this.ghostObject) {
      this.scene.remove(this.ghostObject);
      this.ghostObject.geometry.dispose();
      this.ghostObject = null;
    }
    if (previous && previous.revision < cloud.revision) {
      const kept = new Set(cloud.points.map((p) => p.join(",")));
      const removed = previous.points.filter((p) => !kept.has(p.join(",")));
      if (removed.length > 0) {
        this.ghostObject = makePoints(removed, null, 0.006, 0.25, GHOST_COLOR);
        this.scene.add(this.ghostObject);
      }
    }
  }

  showGoal(goal: GoalPoseMsg | null): void {
    if (this.goalObject) {
      this.scene.remove(this.goalObject);
      this.goalObject = null;
    }
    if (!goal) {
      return;
    }
    const group = new THREE.Group();
    const disk = new THREE.Mesh(
      new THREE.CylinderGeometry(0.25, 0.25, 0.02, 32),
      new THREE.MeshStandardMaterial({ color: 0x3fae6a, transparent: true, opacity: 0.6 }),
    );
    disk.rotation.x = Math.PI / 2;
    const arrow = new THREE.Mesh(
      new THREE.ConeGeometry(0.07, 0.3, 16),
      new THREE.MeshStandardMaterial({ color: 0x3fae6a }),
    );
    arrow.position.set(0.2, 0, 0.05);
    arrow.rotation.z = -Math.PI / 2;
    group.add(disk, arrow);
    group.position.set(...goal.position);
    group.rotation.z = goal.yaw;
    this.goalObject = group;
    this.scene.add(group);
  }

  showVolumes(volumes: EditableVolume[], selected: number | null): void {
    const alive = new Set(volumes.map((v) => v.id));
    for (const [id, mesh] of this.volumeObjects) {
      if (!alive.has(id)) {
        this.scene.remove(mesh);
        mesh.geometry.dispose();
        this.volumeObjects.delete(id);
      }
    }
    for (const volume of volumes) {
      let mesh = this.volumeObjects.get(volume.id);
      const geometry = volumeGeometry(volume);
      if (!mesh) {
        mesh = new THREE.Mesh(
          geometry,
          new THREE.MeshStandardMaterial({
            color: VOLUME_COLOR,
            transparent: true,
            opacity: 0.45,
            side: THREE.DoubleSide,
          }),
        );
        this.volumeObjects.set(volume.id, mesh);
        this.scene.add(mesh);
      } else {
        mesh.geometry.dispose();
        mesh.geometry = geometry;
      }
      mesh.position.set(...volume.position);
      const [w, x, y, z] = volume.orientation;
      mesh.quaternion.set(x, y, z, w);
      (mesh.material as THREE.MeshStandardMaterial).color.setHex(
        volume.id === selected ? VOLUME_SELECTED : VOLUME_COLOR,
      );
    }
  }

  private animate = (): void => {
    requestAnimationFrame(this.animate);
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  };
}

function makePoints(
  points: [number, number, number][],
  colors: [number, number, number][] | null,
  size: number,
  opacity: number,
  flatColor?: number,
): THREE.Points {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute(
    "position",
    new THREE.Float32BufferAttribute(points.flat(), 3),
  );
  let material: THREE.PointsMaterial;
  if (colors && flatColor === undefined) {
    geometry.setAttribute(
      "color",
      new THREE.Float32BufferAttribute(colors.flat().map((c) => c / 255), 3),
    );
    material = new THREE.PointsMaterial({
      size,
      vertexColors: true,
      transparent: opacity < 1,
      opacity,
    });
  } else {
    material = new THREE.PointsMaterial({
      size,
      color: flatColor ?? 0x4da3ff,
      transparent: opacity < 1,
      opacity,
    });
  }
  return new THREE.Points(geometry, material);
}

function volumeGeometry(volume: EditableVolume): THREE.BufferGeometry {
  switch (volume.shape) {
    case "box":
      return new THREE.BoxGeometry(volume.dims[0], volume.dims[1], volume.dims[2]);
    case "cylinder": {
      const geometry = new THREE.CylinderGeometry(
        volume.dims[0], volume.dims[0], volume.dims[1], 32,
      );
      geometry.rotateX(Math.PI / 2); // wire schema: cylinder axis = local z
      return geometry;
    }
    case "sphere":
      return new THREE.SphereGeometry(volume.dims[0], 24, 16);
  }
}
