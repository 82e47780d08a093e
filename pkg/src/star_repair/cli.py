"""Command-line front door.

Subcommands: detect, plan, navigate, serve, gen-demo. Exit codes are a
stable contract for scripts: 0 success, 1 I/O or parse failure, 2 plan
empty after exclusion, 3 no navigation path.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

from star_repair import demo
from star_repair.cloud import parse_pcd, serialize_pcd
from star_repair.config import ScenarioConfig, load_config, resolve_port
from star_repair.coverage import replan_after_exclusion
from star_repair.detection import detect_corrosion_stub, euclidean_cluster, make_cluster
from star_repair.errors import (
    ConfigError,
    EmptyAfterExclusion,
    NoPath,
    PcdError,
    StarError,
)
from star_repair.exclusion import ExclusionSet
from star_repair.geom import Point3
from star_repair.messages import decode_message, ExclusionSetMsg, to_exclusion_set
from star_repair.navgrid import dijkstra_path, parse_grid, render_path
from star_repair.service import run_service

EXIT_OK = 0
EXIT_IO = 1
EXIT_EMPTY_PLAN = 2
EXIT_NO_PATH = 3


def _read_cloud(path: str):
    try:
        return parse_pcd(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read cloud {path}: {exc}") from None


def _load_base_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        return load_config(Path(args.config))
    return ScenarioConfig()


def _merged_params(args, config: ScenarioConfig):
    params = config.params
    overrides = {}
    for name in ("offset", "spacing"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "viewpoint", None):
        overrides["viewpoint"] = Point3(*args.viewpoint)
    return replace(params, **overrides) if overrides else params


def cmd_detect(args) -> int:
    config = _load_base_config(args)
    cloud = _read_cloud(args.cloud)
    out_dir = Path(args.out)
    radius = args.radius if args.radius is not None else config.detection_radius
    min_size = args.min_size if args.min_size is not None else config.min_cluster_size
    if len(cloud) == 0:
        print("0 clusters")
        return EXIT_OK
    mask = detect_corrosion_stub(cloud)
    corroded = cloud.select(mask.indices)
    clusters = euclidean_cluster(corroded, radius, min_size)
    print(f"{len(clusters)} clusters ({len(mask)} corroded points of {len(cloud)})")
    out_dir.mkdir(parents=True, exist_ok=True)
    for cluster in clusters:
        c = cluster.centroid
        print(
            f"  cluster {cluster.id}: {len(cluster.cloud)} points, "
            f"centroid ({c.x:.3f}, {c.y:.3f}, {c.z:.3f})"
        )
        path = out_dir / f"cluster_{cluster.id}.pcd"
        path.write_text(serialize_pcd(cluster.cloud), encoding="utf-8")
        print(f"  wrote {path}")
    return EXIT_OK


def _load_exclusions(path: str, cluster_id: int) -> ExclusionSet:
    raw = Path(path).read_text(encoding="utf-8")
    msg = decode_message(raw)
    if not isinstance(msg, ExclusionSetMsg):
        raise ConfigError(f"{path} is not an exclusions message")
    return to_exclusion_set(msg, cluster_id)


def cmd_plan(args) -> int:
    config = _load_base_config(args)
    cloud = _read_cloud(args.cloud)
    params = _merged_params(args, config)
    cluster = make_cluster(0, cloud)
    exclusions = (
        _load_exclusions(args.exclusions, cluster.id)
        if args.exclusions
        else ExclusionSet(cluster.id)
    )
    plan, retained = replan_after_exclusion(cluster, exclusions, params)
    print(
        f"fixture_count {len(plan.fixtures)}\n"
        f"reachable_count {plan.reachable_count}\n"
        f"coverage_fraction {plan.coverage_fraction:.6f}\n"
        f"retained_points {len(retained)}"
    )
    out = Path(args.out)
    rows = ["x,y,z,qw,qx,qy,qz,reachable"]
    for f in plan.fixtures:
        p, q = f.pose.position, f.pose.orientation
        rows.append(
            f"{p.x:.9g},{p.y:.9g},{p.z:.9g},"
            f"{q.w:.9g},{q.x:.9g},{q.y:.9g},{q.z:.9g},{int(f.reachable)}"
        )
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


def _parse_cell(text: str) -> tuple[int, int]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigError(f"cell must be 'row,col', got {text!r}")
    return (int(parts[0]), int(parts[1]))


def cmd_navigate(args) -> int:
    try:
        grid = parse_grid(Path(args.grid).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read grid {args.grid}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    start = _parse_cell(args.start)
    goal = _parse_cell(args.goal)
    path, cost = dijkstra_path(grid, start, goal)
    print(f"cost {cost:.5f}")
    print("path " + " ".join(f"({r},{c})" for r, c in path))
    print(render_path(grid, path))
    return EXIT_OK


def cmd_serve(args) -> int:
    if not args.config:
        raise ConfigError("serve needs --config")
    config = load_config(Path(args.config))
    if args.cloud:
        config.cloud = Path(args.cloud)
    if args.grid:
        config.grid = Path(args.grid)
    if args.standoff is not None:
        if not args.standoff > config.footprint_radius:
            raise ConfigError(
                f"standoff {args.standoff} must exceed footprint radius "
                f"{config.footprint_radius}"
            )
        config.standoff = args.standoff
    port = resolve_port(args.port, config)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    try:
        asyncio.run(run_service(config, host=args.host, port=port))
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        print(f"error: cannot bind port {port}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_gen_demo(args) -> int:
    dest = Path(args.out)
    config_path = demo.write_demo_assets(dest)
    ui_src = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if not ui_src.is_dir():
        ui_src = Path.cwd() / "frontend" / "dist"
    if ui_src.is_dir():
        shutil.copytree(ui_src, dest / "ui", dirs_exist_ok=True)
        print(f"copied review UI from {ui_src}")
    else:
        print("no built review UI found (frontend/dist); serve will run without it")
    print(f"wrote demo assets under {dest}")
    print(f"config: {config_path}")
    print(f"try: star serve --config {config_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="star",
        description="surface-repair review pipeline: detect, plan, navigate, serve",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="cluster corroded points in a cloud")
    p.add_argument("--cloud", required=True)
    p.add_argument("--config")
    p.add_argument("--radius", type=float, help="cluster linking radius (m)")
    p.add_argument("--min-size", type=int, dest="min_size", help="minimum cluster size")
    p.add_argument("--out", default=".", help="directory for cluster_<i>.pcd files")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("plan", help="plan coverage fixtures for a cluster cloud")
    p.add_argument("--cloud", required=True, help="cluster PCD file")
    p.add_argument("--exclusions", help="exclusions message file (json)")
    p.add_argument("--config")
    p.add_argument("--offset", type=float, help="fixture standoff from surface (m)")
    p.add_argument("--spacing", type=float, help="fixture sample spacing (m)")
    p.add_argument("--viewpoint", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--out", default="fixtures.csv")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("navigate", help="plan a base path on a grid file")
    p.add_argument("--grid", required=True)
    p.add_argument("--start", required=True, help="start cell 'row,col'")
    p.add_argument("--goal", required=True, help="goal cell 'row,col'")
    p.set_defaults(func=cmd_navigate)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--config", required=True)
    p.add_argument("--port", type=int)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cloud", help="override the config's scene cloud")
    p.add_argument("--grid", help="override the config's occupancy grid")
    p.add_argument("--standoff", type=float, help="override the base standoff (m)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen-demo", help="write the synthetic demo scenario")
    p.add_argument("--out", default="demo")
    p.set_defaults(func=cmd_gen_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmptyAfterExclusion as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_PLAN
    except NoPath as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (ConfigError, PcdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
