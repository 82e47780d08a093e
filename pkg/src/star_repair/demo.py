"""Synthetic desk-scale scenario: corroded plate, pipe+valve equipment, floor grid.

Everything is generated deterministically (seed fixed) so end-to-end runs
are reproducible without sensors. World layout, positive quadrant to match
the grid file's implicit (0,0) origin:

  * 5 m x 5 m floor grid at 0.05 m/cell with a wall gap forcing a detour
  * vertical 1 m x 1 m plate at x = 4.0 (faces the robot at x < 4)
  * two rust patches (one large around the equipment, one small) plus a few
    sub-threshold rust specks
  * a gray pipe stub with a valve head sticking out of the plate; it is the
    "sensitive equipment" the reviewer masks with the default exclusion box
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from star_repair.cloud import PointCloud, serialize_pcd

SEED = 7
PLATE_X = 4.0
PLATE_Y = (2.0, 3.0)
PLATE_Z = (0.2, 1.2)
STEP = 0.005

MAIN_PATCH = {"center": (2.6, 0.7), "radii": (0.28, 0.22)}
SMALL_PATCH = {"center": (2.15, 0.35), "radius": 0.06}
SPECKS = [(2.9, 1.05), (2.08, 0.95), (2.45, 1.1)]

PIPE = {"y": 2.75, "z": 0.7, "radius": 0.0127, "length": 0.15}
VALVE_BOX = {"dims": (0.05, 0.07, 0.07)}

# reviewer's default mask: pipe + valve with a buffer
EXCLUSION_BOX = {
    "position": [PLATE_X - 0.07, PIPE["y"], PIPE["z"]],
    "orientation": [1.0, 0.0, 0.0, 0.0],
    "dims": [0.4, 0.25, 0.25],
}

ROBOT_START = (1.0, 2.5, 0.6)


def _inside_ellipse(y, z, center, radii):
    return ((y - center[0]) / radii[0]) ** 2 + ((z - center[1]) / radii[1]) ** 2 <= 1.0


def generate_scene(seed: int = SEED) -> PointCloud:
    rng = np.random.default_rng(seed)
    ys = np.arange(PLATE_Y[0], PLATE_Y[1] + STEP / 2, STEP)
    zs = np.arange(PLATE_Z[0], PLATE_Z[1] + STEP / 2, STEP)
    gy, gz = np.meshgrid(ys, zs)
    gy, gz = gy.ravel(), gz.ravel()
    gx = PLATE_X + rng.normal(0.0, 0.0003, gy.shape)

    rust = _inside_ellipse(gy, gz, MAIN_PATCH["center"], MAIN_PATCH["radii"])
    sy, sz = SMALL_PATCH["center"]
    rust |= (gy - sy) ** 2 + (gz - sz) ** 2 <= SMALL_PATCH["radius"] ** 2
    for py, pz in SPECKS:
        rust |= (gy - py) ** 2 + (gz - pz) ** 2 <= 0.008 ** 2

    colors = np.empty((gy.size, 3), dtype=np.int64)
    colors[:] = (120, 122, 125)
    n_rust = int(rust.sum())
    colors[rust, 0] = rng.integers(145, 186, n_rust)
    colors[rust, 1] = rng.integers(55, 76, n_rust)
    colors[rust, 2] = rng.integers(35, 56, n_rust)
    plate_pts = np.column_stack([gx, gy, gz])

    pipe_pts = _pipe_points()
    pipe_colors = np.tile([205, 205, 210], (len(pipe_pts), 1))

    points = np.vstack([plate_pts, pipe_pts])
    all_colors = np.vstack([colors, pipe_colors])
    return PointCloud(points, all_colors)


def _pipe_points() -> np.ndarray:
    y0, z0, r, length = PIPE["y"], PIPE["z"], PIPE["radius"], PIPE["length"]
    angles = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    xs = np.arange(PLATE_X - length, PLATE_X, STEP)
    gx, ga = np.meshgrid(xs, angles)
    pipe = np.column_stack([
        gx.ravel(),
        y0 + r * np.cos(ga.ravel()),
        z0 + r * np.sin(ga.ravel()),
    ])
    # valve head: small box shell at the free end of the pipe
    bx, by, bz = VALVE_BOX["dims"]
    vx = np.arange(PLATE_X - length - bx, PLATE_X - length, STEP)
    vy = np.arange(y0 - by / 2, y0 + by / 2 + STEP / 2, STEP)
    vz = np.arange(z0 - bz / 2, z0 + bz / 2 + STEP / 2, STEP)
    gx, gy, gz = np.meshgrid(vx, vy, vz)
    valve = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    return np.vstack([pipe, valve])


def generate_grid_text() -> str:
    w = h = 100
    occ = np.zeros((h, w), dtype=bool)
    # wall at x = 2.5 (col 50) from y = 0 up to y = 3.0 (row 60): the base
    # must detour through the gap above
    occ[0:61, 50] = True
    rows = ["100 100 0.05"]
    for r in range(h):
        rows.append("".join("#" if occ[r, c] else "." for c in range(w)))
    return "\n".join(rows) + "\n"


def write_png(path: Path, pixels: np.ndarray) -> None:
    """Minimal RGB PNG writer (8-bit, no filters beyond None)."""
    h, w, _ = pixels.shape
    raw = b"".join(b"\x00" + pixels[r].astype(np.uint8).tobytes() for r in range(h))

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data))
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    png = (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw))
        + chunk(b"IEND", b"")
    )
    Path(path).write_bytes(png)


def render_snapshot(scene: PointCloud, size: int = 64) -> np.ndarray:
    """Plate-aligned view of the scene colors, as an RGB pixel grid."""
    pixels = np.full((size, size, 3), 40, dtype=np.uint8)
    ys = scene.points[:, 1]
    zs = scene.points[:, 2]
    cols = np.clip(((ys - PLATE_Y[0]) / (PLATE_Y[1] - PLATE_Y[0]) * (size - 1)), 0, size - 1).astype(int)
    rows = np.clip(((PLATE_Z[1] - zs) / (PLATE_Z[1] - PLATE_Z[0]) * (size - 1)), 0, size - 1).astype(int)
    pixels[rows, cols] = scene.colors
    return pixels


def demo_config_dict() -> dict:
    return {
        "cloud": "assets/scene.pcd",
        "grid": "assets/floor.grid",
        "port": 8765,
        "asset_dir": "assets",
        "ui_dir": "ui",
        "log_dir": "logs",
        "image_uri": "/assets/scene.png",
        "start_cell": [50, 20],
        "shoulder_height": 0.6,
        "execution_step_seconds": 0.2,
        "params": {
            "offset": 0.15,
            "spacing": 0.05,
            "k": 15,
            "roll_candidates": 8,
            "viewpoint": list(ROBOT_START),
            "reach": {
                "shoulder": [0.0, 0.0, 0.0],
                "r_min": 0.2,
                "r_max": 1.0,
                "cone_half_angle": 1.2,
            },
        },
        "detection": {"radius": 0.05, "min_size": 30},
        "base": {"standoff": 0.8, "footprint_radius": 0.3},
    }


def exclusion_file_dict(session_id: int = 1) -> dict:
    return {
        "type": "exclusions",
        "session_id": session_id,
        "volumes": [
            {
                "shape": "box",
                "pose": {
                    "position": EXCLUSION_BOX["position"],
                    "orientation": EXCLUSION_BOX["orientation"],
                },
                "dims": EXCLUSION_BOX["dims"],
            }
        ],
    }


def write_demo_assets(dest: Path, seed: int = SEED) -> Path:
    """Write scene cloud, grid, snapshot, exclusion file, and config.

    Returns the path of the config file.
    """
    dest = Path(dest)
    assets = dest / "assets"
    assets.mkdir(parents=True, exist_ok=True)
    scene = generate_scene(seed)
    (assets / "scene.pcd").write_text(serialize_pcd(scene), encoding="utf-8")
    (assets / "floor.grid").write_text(generate_grid_text(), encoding="utf-8")
    write_png(assets / "scene.png", render_snapshot(scene))
    (assets / "exclusions.json").write_text(
        json.dumps(exclusion_file_dict(), indent=2) + "\n", encoding="utf-8"
    )
    config_path = dest / "demo.json"
    config_path.write_text(
        json.dumps(demo_config_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return config_path
