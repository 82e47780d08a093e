"""Per-cluster review lifecycle: states, events, and the transition table.

advance() is a pure function from (session, event) to a new session; the
service serializes all calls through one queue, so sessions never see
concurrent writes. Exactly eight transitions are legal; everything else
raises IllegalTransition. Executing is reachable only through a Repair
decision, which is the approval gate.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from star_repair.cloud import PointCloud
from star_repair.coverage import RepairPlan
from star_repair.detection import Cluster
from star_repair.errors import IllegalTransition
from star_repair.exclusion import ExclusionSet
from star_repair.navgrid import GoalPose


class SessionState(enum.Enum):
    DETECTED = "detected"
    AWAITING_REVIEW = "awaiting_review"
    MODIFYING = "modifying"
    REVISED_PENDING = "revised_pending"
    APPROVED = "approved"
    REJECTED = "rejected"
    NAVIGATING = "navigating"
    EXECUTING = "executing"
    DONE = "done"


class DecisionValue(enum.Enum):
    REPAIR = "repair"
    MODIFY = "modify"
    REJECT = "reject"


@dataclass(frozen=True)
class DetectionReady:
    name = "detection_ready"


@dataclass(frozen=True)
class DecisionMade:
    value: DecisionValue
    name = "decision"


@dataclass(frozen=True)
class ExclusionSubmitted:
    exclusions: ExclusionSet
    name = "exclusions"


@dataclass(frozen=True)
class RevisionReady:
    plan: RepairPlan
    retained: PointCloud
    name = "revision_ready"


@dataclass(frozen=True)
class RevisionConfirmed:
    # part of the event vocabulary but never legal; revised plans are
    # confirmed with a second Repair decision instead
    name = "revision_confirmed"


@dataclass(frozen=True)
class NavigationDone:
    name = "navigation_done"


@dataclass(frozen=True)
class ExecutionDone:
    name = "execution_done"


Event = Union[
    DetectionReady,
    DecisionMade,
    ExclusionSubmitted,
    RevisionReady,
    RevisionConfirmed,
    NavigationDone,
    ExecutionDone,
]

ALL_EVENT_TYPES = (
    DetectionReady,
    DecisionMade,
    ExclusionSubmitted,
    RevisionReady,
    RevisionConfirmed,
    NavigationDone,
    ExecutionDone,
)


@dataclass(frozen=True)
class ReviewSession:
    """One detected cluster moving from notification to execution (or rejection)."""

    session_id: int
    cluster: Cluster
    state: SessionState
    current_plan: Optional[RepairPlan]
    goal: Optional[GoalPose]
    current_cloud: PointCloud
    exclusions: ExclusionSet
    revision: int = 0
    history: tuple[tuple[float, Event], ...] = field(default_factory=tuple)


def new_session(
    session_id: int,
    cluster: Cluster,
    plan: RepairPlan,
    goal: Optional[GoalPose] = None,
) -> ReviewSession:
    """Fresh session in Detected with its initial plan already computed."""
    return ReviewSession(
        session_id=session_id,
        cluster=cluster,
        state=SessionState.DETECTED,
        current_plan=plan,
        goal=goal,
        current_cloud=cluster.cloud,
        exclusions=ExclusionSet(cluster.id),
    )


def _event_label(event: Event) -> str:
    if isinstance(event, DecisionMade):
        return f"decision:{event.value.value}"
    return event.name


def advance(session: ReviewSession, event: Event, timestamp: Optional[float] = None) -> ReviewSession:
    """Apply one event; returns the successor session or raises IllegalTransition.

    Legal transitions:
      Detected          --detection_ready-->    AwaitingReview
      AwaitingReview    --decision:repair-->    Navigating
      AwaitingReview    --decision:reject-->    Rejected
      AwaitingReview    --decision:modify-->    Modifying
      Modifying         --exclusions-->         RevisedPending
      RevisedPending    --revision_ready-->     AwaitingReview
      Navigating        --navigation_done-->    Executing
      Executing         --execution_done-->     Done
    """
    ts = time.time() if timestamp is None else timestamp
    if session.history:
        ts = max(ts, session.history[-1][0])
    changes: dict = {}

    state = session.state
    if state is SessionState.DETECTED and isinstance(event, DetectionReady):
        changes["state"] = SessionState.AWAITING_REVIEW
    elif state is SessionState.AWAITING_REVIEW and isinstance(event, DecisionMade):
        changes["state"] = {
            DecisionValue.REPAIR: SessionState.NAVIGATING,
            DecisionValue.REJECT: SessionState.REJECTED,
            DecisionValue.MODIFY: SessionState.MODIFYING,
        }[event.value]
    elif state is SessionState.MODIFYING and isinstance(event, ExclusionSubmitted):
        if event.exclusions.cluster_id != session.cluster.id:
            raise IllegalTransition(state, f"exclusions for cluster {event.exclusions.cluster_id}")
        changes["state"] = SessionState.REVISED_PENDING
        changes["exclusions"] = event.exclusions
    elif state is SessionState.REVISED_PENDING and isinstance(event, RevisionReady):
        changes["state"] = SessionState.AWAITING_REVIEW
        changes["current_plan"] = event.plan
        changes["current_cloud"] = event.retained
        changes["revision"] = session.revision + 1
    elif state is SessionState.NAVIGATING and isinstance(event, NavigationDone):
        changes["state"] = SessionState.EXECUTING
    elif state is SessionState.EXECUTING and isinstance(event, ExecutionDone):
        changes["state"] = SessionState.DONE
    else:
        raise IllegalTransition(state, _event_label(event))

    changes["history"] = session.history + ((ts, event),)
    return replace(session, **changes)


def repair_approved(session: ReviewSession) -> bool:
    """True when the history contains an explicit Repair decision."""
    return any(
        isinstance(e, DecisionMade) and e.value is DecisionValue.REPAIR
        for _, e in session.history
    )
