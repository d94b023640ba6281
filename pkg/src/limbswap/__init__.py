"""limbswap: replace a tracked hand with an interactive virtual prosthesis.

The engine turns timestamped hand poses into the world pose of a digital
object attached at the wrist, discretizes pinch/grab/swipe/stillness
gestures, and runs two playable tasks (ball moving, line drawing) on a
deterministic fixed-tick loop with recording and replay. A line-delimited
message protocol exposes live sessions to clients.
"""

from .engine import (
    ReplayResult,
    RenderFrame,
    SessionConfig,
    SessionState,
    create_session,
    load_frames,
    record_frames,
    run_replay,
    session_metrics,
    state_hash,
    step,
)
from .errors import LimbswapError
from .gestures import DetectorState, GestureConfig, GestureEvent, detect_gestures
from .pose import (
    HandPoseFrame,
    PoseTrace,
    interpolate,
    load_trace,
    palm_velocity,
    resample_trace,
    save_trace,
    validate_frame,
)
from .prosthesis import (
    ProsthesisSpec,
    affordance_lookup,
    builtin_catalog,
    catalog_by_id,
    load_spec,
    serialize_spec,
    validate_spec,
)
from .retarget import ObjectPose, RigidTransform, attach, collision_proxy_world, drive_articulation, smooth
from .scan import PointCloud, load_ply, pca_obb, scan_to_spec, sphere_proxy
from .synth import phase_windows, synth_trace
from .tasks import TaskMetrics, ball_step, draw_step, ray_plane

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
