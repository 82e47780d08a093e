"""Full-duplex review service.

Clients connect over WebSocket at /ws. The scenario bootstrap detects
clusters in the configured cloud, plans each one, and emits one
DetectionNotification per cluster; Decision and ExclusionSet messages route
through the session state machine; revised clouds, plan summaries, goal
poses, and execution status are pushed to every connected client.

Concurrency model: the session store is a single-writer actor. Every
advance() runs inside one store task consuming a command queue; planning
jobs run on worker threads and post their RevisionReady back onto the
queue; client I/O is concurrent per connection. A static file responder on
the same port serves the review UI and scene assets.
"""

from __future__ import annotations

import asyncio
import http
import logging
import mimetypes
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import ServerConnection, broadcast, serve as ws_serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Request, Response

from star_repair.cloud import parse_pcd
from star_repair.config import ScenarioConfig
from star_repair.coverage import plan_cluster, replan_after_exclusion
from star_repair.detection import detect_events
from star_repair.errors import (
    ConfigError,
    EmptyAfterExclusion,
    IllegalTransition,
    MessageError,
    NoPath,
    NoValidPose,
    StarError,
    UnknownSession,
)
from star_repair.eventlog import (
    SessionLogWriter,
    created_record,
    event_record,
    list_session_logs,
    replay_session,
    session_log_path,
    stored_params,
)
from star_repair.exclusion import apply_exclusions
from star_repair.geom import Point3
from star_repair.messages import (
    Decision,
    DetectionNotification,
    ErrorMsg,
    ExclusionSetMsg,
    ExecutionStatus,
    GoalPoseMsg,
    Message,
    PlanSummary,
    chunk_cloud,
    decode_message,
    encode_message,
    to_exclusion_set,
)
from star_repair.navgrid import compute_goal_pose, dijkstra_path, parse_grid, RobotFootprint
from star_repair.session import (
    DecisionMade,
    DecisionValue,
    DetectionReady,
    Event,
    ExclusionSubmitted,
    ExecutionDone,
    NavigationDone,
    ReviewSession,
    RevisionReady,
    SessionState,
    advance,
    new_session,
)

log = logging.getLogger("star.service")

_PHASE_BY_STATE = {
    SessionState.NAVIGATING: "navigating",
    SessionState.EXECUTING: "executing",
    SessionState.DONE: "done",
}


def bootstrap_sessions(config: ScenarioConfig) -> list[tuple[ReviewSession, object]]:
    """Run the detection pipeline and build one Detected session per cluster.

    Returns (session, effective_params) pairs: when the config gives a
    shoulder_height, the reach shoulder is re-anchored above each cluster's
    goal pose, so params differ per session.
    """
    if config.cloud is None:
        raise ConfigError("scenario needs a cloud file")
    scene = parse_pcd(Path(config.cloud).read_text(encoding="utf-8"))
    events = detect_events(
        scene, config.image_uri, time.time(),
        config.detection_radius, config.min_cluster_size,
    )
    grid = None
    if config.grid is not None:
        grid = parse_grid(Path(config.grid).read_text(encoding="utf-8"))
    sessions = []
    for i, cluster in enumerate((e.cluster for e in events), start=1):
        params = config.params
        goal = None
        if grid is not None:
            from star_repair.coverage import estimate_normals

            normals = estimate_normals(cluster.cloud, params.k, params.viewpoint)
            try:
                goal = compute_goal_pose(
                    cluster, normals, RobotFootprint(config.footprint_radius),
                    grid, config.standoff,
                )
            except (NoValidPose, StarError) as exc:
                log.warning("session %d: no goal pose (%s)", i, exc)
        if goal is not None and config.shoulder_height is not None and params.reach is not None:
            shoulder = Point3(goal.position.x, goal.position.y, config.shoulder_height)
            params = replace(params, reach=replace(params.reach, shoulder=shoulder))
        plan = plan_cluster(cluster, params)
        sessions.append((new_session(i, cluster, plan, goal), params))
    return sessions


class ReviewService:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.sessions: dict[int, ReviewSession] = {}
        self.session_params: dict[int, object] = {}
        self.logs: dict[int, SessionLogWriter] = {}
        self.clients: set[ServerConnection] = set()
        self.commands: asyncio.Queue = asyncio.Queue()
        self.server = None
        self._store_task: Optional[asyncio.Task] = None
        self._grid = None
        self._pending: set[asyncio.Task] = set()

    # --- lifecycle ---

    async def start(self, host: str = "127.0.0.1", port: Optional[int] = None) -> int:
        if self.config.grid is not None:
            self._grid = parse_grid(Path(self.config.grid).read_text(encoding="utf-8"))
        recovered = await asyncio.to_thread(self._recover_or_bootstrap)
        self.server = await ws_serve(
            self._handle_client,
            host,
            self.config.port if port is None else port,
            process_request=self._process_request,
        )
        bound = self.server.sockets[0].getsockname()[1]
        log.info("listening on port %d (%d sessions)", bound, len(self.sessions))
        self._store_task = asyncio.create_task(self._store_loop())
        for session in recovered:
            if session.state is SessionState.DETECTED:
                await self.commands.put(("event", session.session_id, DetectionReady()))
        return bound

    async def stop(self) -> None:
        for task in list(self._pending):
            task.cancel()
        if self._store_task is not None:
            await self.commands.put(("shutdown",))
            await self._store_task
        if self.server is not None:
            self.server.close()
            await self.server.wait_closed()
        for writer in self.logs.values():
            writer.close()
        log.info("event logs flushed")

    def _recover_or_bootstrap(self) -> list[ReviewSession]:
        existing = list_session_logs(self.config.log_dir)
        if existing:
            log.info("recovering %d sessions from %s", len(existing), self.config.log_dir)
            for path in existing:
                session = replay_session(path, self.config.params)
                params = stored_params(path) or self.config.params
                self.sessions[session.session_id] = session
                self.session_params[session.session_id] = params
                self.logs[session.session_id] = SessionLogWriter(path)
            return []
        now = time.time()
        fresh = []
        for session, params in bootstrap_sessions(self.config):
            self.sessions[session.session_id] = session
            self.session_params[session.session_id] = params
            writer = SessionLogWriter(
                session_log_path(self.config.log_dir, session.session_id)
            )
            writer.append(created_record(session, self.config.image_uri, now, params))
            self.logs[session.session_id] = writer
            fresh.append(session)
        return fresh

    # --- client I/O ---

    async def _handle_client(self, conn: ServerConnection) -> None:
        self.clients.add(conn)
        try:
            await self._send_snapshot(conn)
            async for frame in conn:
                try:
                    message = decode_message(frame)
                except MessageError as exc:
                    await self._send(conn, ErrorMsg(code=_error_code(exc), detail=str(exc)))
                    continue
                await self.commands.put(("message", conn, message))
        except ConnectionClosed:
            pass
        finally:
            self.clients.discard(conn)

    async def _send_snapshot(self, conn: ServerConnection) -> None:
        for session in list(self.sessions.values()):
            for msg in session_snapshot_messages(session, self.config.image_uri):
                await self._send(conn, msg)

    async def _send(self, conn: ServerConnection, msg: Message) -> None:
        try:
            await conn.send(encode_message(msg))
        except ConnectionClosed:
            self.clients.discard(conn)

    def _broadcast(self, msg: Message) -> None:
        broadcast(self.clients, encode_message(msg))

    # --- single-writer store ---

    async def _store_loop(self) -> None:
        while True:
            command = await self.commands.get()
            if command[0] == "shutdown":
                return
            try:
                if command[0] == "message":
                    _, conn, message = command
                    await self._apply_client_message(conn, message)
                elif command[0] == "event":
                    _, session_id, event = command
                    await self._apply_event(session_id, event)
            except Exception:
                log.exception("store command failed")

    def _session(self, session_id: int) -> ReviewSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id}") from None

    async def _apply_client_message(self, conn: ServerConnection, message: Message) -> None:
        try:
            if isinstance(message, Decision):
                self._session(message.session_id)
                event: Event = DecisionMade(DecisionValue(message.value))
            elif isinstance(message, ExclusionSetMsg):
                session = self._session(message.session_id)
                exclusions = to_exclusion_set(message, session.cluster.id)
                retained, _ = apply_exclusions(session.cluster.cloud, exclusions)
                if len(retained) < 3:
                    await self._send(conn, ErrorMsg(
                        "empty_after_exclusion",
                        "exclusion volumes would remove the whole surface",
                    ))
                    return
                event = ExclusionSubmitted(exclusions)
            else:
                await self._send(conn, ErrorMsg(
                    "unexpected_type", f"clients may not send {message.type!r}"
                ))
                return
        except UnknownSession as exc:
            await self._send(conn, ErrorMsg("unknown_session", str(exc)))
            return
        await self._apply_event(message.session_id, event, conn)

    async def _apply_event(
        self, session_id: int, event: Event, conn: Optional[ServerConnection] = None
    ) -> None:
        try:
            session = self._session(session_id)
        except UnknownSession as exc:
            if conn is not None:
                await self._send(conn, ErrorMsg("unknown_session", str(exc)))
            else:
                log.warning("dropping event: %s", exc)
            return
        try:
            updated = advance(session, event)
        except IllegalTransition as exc:
            if conn is not None:
                await self._send(conn, ErrorMsg("illegal_transition", str(exc)))
            else:
                log.warning("session %d: %s", session_id, exc)
            return
        self.sessions[session_id] = updated
        self.logs[session_id].append(event_record(event, updated.history[-1][0]))
        log.info(
            "session %d: %s -> %s", session_id, session.state.value, updated.state.value
        )
        await self._emit_effects(session, updated)

    async def _emit_effects(self, before: ReviewSession, after: ReviewSession) -> None:
        sid = after.session_id
        state = after.state
        if state is SessionState.AWAITING_REVIEW and before.state is SessionState.DETECTED:
            for msg in session_snapshot_messages(after, self.config.image_uri):
                self._broadcast(msg)
        elif state is SessionState.REVISED_PENDING:
            self._schedule(self._replan_job(after))
        elif state is SessionState.AWAITING_REVIEW and before.state is SessionState.REVISED_PENDING:
            for chunk in chunk_cloud(
                sid, after.revision, after.current_cloud.points.tolist(),
                after.current_cloud.colors.tolist() if after.current_cloud.colors is not None else None,
            ):
                self._broadcast(chunk)
            self._broadcast(plan_summary_message(after))
        elif state is SessionState.NAVIGATING:
            self._broadcast(ExecutionStatus(sid, "navigating"))
            if after.goal is not None:
                self._broadcast(goal_message(after))
            self._schedule(self._navigate_job(after))
        elif state is SessionState.EXECUTING:
            self._broadcast(ExecutionStatus(sid, "executing"))
            self._schedule(self._delayed_event(sid, ExecutionDone()))
        elif state is SessionState.DONE:
            self._broadcast(ExecutionStatus(sid, "done"))

    def _schedule(self, coro) -> None:
        task = asyncio.create_task(coro)
        self._pending.add(task)
        task.add_done_callback(self._pending.discard)

    async def _replan_job(self, session: ReviewSession) -> None:
        params = self.session_params[session.session_id]
        try:
            plan, retained = await asyncio.to_thread(
                replan_after_exclusion, session.cluster, session.exclusions, params
            )
        except EmptyAfterExclusion as exc:
            # pre-checked in _apply_client_message; only reachable on recovery races
            log.warning("session %d replan failed: %s", session.session_id, exc)
            return
        await self.commands.put(("event", session.session_id, RevisionReady(plan, retained)))

    async def _navigate_job(self, session: ReviewSession) -> None:
        if self._grid is not None and self.config.start_cell and session.goal is not None:
            goal_cell = self._grid.cell_of(session.goal.position.x, session.goal.position.y)
            try:
                path, cost = await asyncio.to_thread(
                    dijkstra_path, self._grid, tuple(self.config.start_cell), goal_cell
                )
                log.info(
                    "session %d: base path %d cells, cost %.3f",
                    session.session_id, len(path), cost,
                )
            except (NoPath, StarError) as exc:
                log.warning("session %d: navigation planning failed (%s); tele-op assumed",
                            session.session_id, exc)
        await asyncio.sleep(self.config.execution_step_seconds)
        await self.commands.put(("event", session.session_id, NavigationDone()))

    async def _delayed_event(self, session_id: int, event: Event) -> None:
        await asyncio.sleep(self.config.execution_step_seconds)
        await self.commands.put(("event", session_id, event))

    # --- static assets ---

    def _process_request(self, conn: ServerConnection, request: Request):
        if request.path == "/ws":
            return None
        return self._static_response(request.path)

    def _static_response(self, path: str):
        path = path.split("?", 1)[0]
        candidates = []
        if path.startswith("/assets/") and self.config.asset_dir is not None:
            candidates.append((Path(self.config.asset_dir), path[len("/assets/"):]))
        elif self.config.ui_dir is not None:
            rel = path.lstrip("/") or "index.html"
            candidates.append((Path(self.config.ui_dir), rel))
        for root, rel in candidates:
            target = (root / rel).resolve()
            try:
                target.relative_to(root.resolve())
            except ValueError:
                break
            if target.is_file():
                body = target.read_bytes()
                content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
                headers = Headers([
                    ("Content-Type", content_type),
                    ("Content-Length", str(len(body))),
                ])
                return Response(http.HTTPStatus.OK, "OK", headers, body)
        headers = Headers([("Content-Type", "text/plain"), ("Content-Length", "9")])
        return Response(http.HTTPStatus.NOT_FOUND, "Not Found", headers, b"not found")


def _error_code(exc: MessageError) -> str:
    from star_repair.errors import SchemaViolation, UnknownType

    if isinstance(exc, SchemaViolation):
        return "schema"
    if isinstance(exc, UnknownType):
        return "unknown_type"
    return "malformed"


def goal_message(session: ReviewSession) -> GoalPoseMsg:
    return GoalPoseMsg(
        session_id=session.session_id,
        position=session.goal.position.as_tuple(),
        yaw=session.goal.yaw,
    )


def plan_summary_message(session: ReviewSession) -> PlanSummary:
    plan = session.current_plan
    return PlanSummary(
        session_id=session.session_id,
        revision=session.revision,
        fixture_count=len(plan.fixtures),
        reachable_count=plan.reachable_count,
        coverage_fraction=plan.coverage_fraction,
        spacing=plan.spacing,
        offset=plan.offset,
    )


def session_snapshot_messages(session: ReviewSession, image_uri: str) -> list[Message]:
    """Everything a client needs to render one session's current state."""
    messages: list[Message] = [
        DetectionNotification(
            session_id=session.session_id,
            cluster_size=len(session.cluster.cloud),
            centroid=session.cluster.centroid.as_tuple(),
            image_uri=image_uri,
        )
    ]
    messages.extend(
        chunk_cloud(
            session.session_id,
            session.revision,
            session.current_cloud.points.tolist(),
            session.current_cloud.colors.tolist() if session.current_cloud.colors is not None else None,
        )
    )
    if session.goal is not None:
        messages.append(goal_message(session))
    if session.current_plan is not None:
        messages.append(plan_summary_message(session))
    phase = _PHASE_BY_STATE.get(session.state)
    if phase is not None:
        messages.append(ExecutionStatus(session.session_id, phase))
    return messages


async def run_service(config: ScenarioConfig, host: str = "127.0.0.1",
                      port: Optional[int] = None) -> None:
    """Run until cancelled (SIGINT); flushes event logs on the way out."""
    service = ReviewService(config)
    await service.start(host, port)
    try:
        await asyncio.Future()
    except asyncio.CancelledError:
        pass
    finally:
        await service.stop()
