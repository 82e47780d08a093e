"""Human-in-the-loop surface repair planning.

Detect corroded clusters in point clouds, plan coverage fixtures and base
goal poses, let a reviewer carve out exclusion volumes, re-plan, and gate
execution behind explicit approval over a WebSocket protocol.
"""

__version__ = "0.1.0"

from star_repair.cloud import PointCloud, Rgb, parse_pcd, serialize_pcd, voxel_downsample
from star_repair.coverage import (
    PlannerParams,
    ReachabilityModel,
    RepairPlan,
    SurfaceNormals,
    VirtualFixture,
    estimate_normals,
    generate_fixtures,
    plan_coverage,
    replan_after_exclusion,
)
from star_repair.detection import (
    Cluster,
    CorrosionMask,
    DetectionEvent,
    detect_corrosion_stub,
    euclidean_cluster,
)
from star_repair.exclusion import (
    ExclusionSet,
    ExclusionVolume,
    Shape,
    apply_exclusions,
    contains,
)
from star_repair.geom import (
    Point3,
    Pose,
    UnitQuaternion,
    compose,
    inverse_transform_point,
    transform_point,
)
from star_repair.navgrid import (
    GoalPose,
    OccupancyGrid,
    RobotFootprint,
    compute_goal_pose,
    dijkstra_path,
)
from star_repair.session import (
    DecisionValue,
    ReviewSession,
    SessionState,
    advance,
    new_session,
)
