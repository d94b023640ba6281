"""Deterministic fixed-tick session engine.

Pipeline per tick: validate input -> hold/accept pose -> attach ->
drive articulation -> smooth -> detect gestures -> task step -> frame
assembly. The engine contains no randomness and no hidden state: two runs
of the same trace and config produce identical state hashes at every
output tick and byte-identical frame logs.

Render frames are emitted on output-rate ticks only; events from
intermediate ticks are carried into the next emitted frame. Frame logs are
newline-delimited records under the header
``{"format": "render-frames", "version": 1}``.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field, replace
from typing import IO, Any

import numpy as np

from . import quat
from .errors import BadConfig, LimbswapError, ParseError, UnknownProsthesis, UnknownTask
from .gestures import DetectorState, GestureConfig, advance as gesture_advance
from .pose import HandPoseFrame, PoseTrace, frame_from_record, frame_to_record, resample_trace
from .prosthesis import ProsthesisSpec, catalog_by_id
from .retarget import (
    ObjectPose,
    ProxySphere,
    RigidTransform,
    WorldAnchor,
    collision_proxy_world,
    object_pose,
    smooth,
    with_proxy_velocities,
)
from .synth import make_frame
from .tasks import (
    BallTaskConfig,
    BallTaskState,
    DrawTaskConfig,
    DrawTaskState,
    TaskMetrics,
    ball_config_from_mapping,
    ball_metrics,
    ball_step,
    draw_config_from_mapping,
    draw_metrics,
    draw_step,
    make_ball_state,
    make_draw_state,
)

NEUTRAL_WRIST = (0.0, 0.0, 0.30)


@dataclass(frozen=True)
class SessionConfig:
    prosthesis_id: str = "whisk"
    task_id: str = "ball"
    task_config: dict = field(default_factory=dict)
    tick_rate_hz: float = 120.0
    output_frame_rate_hz: float = 60.0
    gesture_config: GestureConfig = field(default_factory=GestureConfig)
    replaced_limb: str = "right"


@dataclass(frozen=True, eq=False)
class RenderFrame:
    tick: int
    object: ObjectPose
    task_view: dict
    events: tuple[dict, ...]
    metrics: TaskMetrics | None
    hand_visible: bool = False  # the limb is replaced, never overlaid

    def to_record(self) -> dict:
        return {
            "tick": self.tick,
            "object": _object_record(self.object),
            "hand_visible": self.hand_visible,
            "task_view": self.task_view,
            "events": list(self.events),
            "metrics": self.metrics.to_record() if self.metrics is not None else None,
        }


@dataclass(frozen=True, eq=False)
class SessionState:
    config: SessionConfig
    spec: ProsthesisSpec
    ball_cfg: BallTaskConfig | None
    draw_cfg: DrawTaskConfig | None
    tick: int
    current_pose: HandPoseFrame
    last_input_t: float | None
    detector: DetectorState
    object_pose: ObjectPose
    prev_proxies: tuple[ProxySphere, ...] | None
    prev_palm: np.ndarray
    ball: BallTaskState | None
    draw: DrawTaskState | None
    pending_events: tuple[dict, ...] = ()
    emitted_ink: int = 0

    @property
    def tick_dt(self) -> float:
        return 1.0 / self.config.tick_rate_hz

    @property
    def output_stride(self) -> int:
        return int(round(self.config.tick_rate_hz / self.config.output_frame_rate_hz))


def _object_record(p: ObjectPose) -> dict:
    return {
        "translation": [float(x) for x in p.transform.translation],
        "rotation": [float(x) for x in p.transform.rotation],
        "scale": p.transform.scale,
        "joint_angles": list(p.joint_angles),
        "anchors": [
            {
                "name": a.name,
                "position": [float(x) for x in a.position],
                "direction": [float(x) for x in a.direction],
                "role": a.role,
            }
            for a in p.anchors_world
        ],
    }


def _object_from_record(rec: dict) -> ObjectPose:
    return ObjectPose(
        transform=RigidTransform(
            translation=np.array(rec["translation"], dtype=np.float64),
            rotation=np.array(rec["rotation"], dtype=np.float64),
            scale=float(rec["scale"]),
        ),
        joint_angles=tuple(float(a) for a in rec["joint_angles"]),
        anchors_world=tuple(
            WorldAnchor(
                a["name"],
                np.array(a["position"], dtype=np.float64),
                np.array(a["direction"], dtype=np.float64),
                a["role"],
            )
            for a in rec["anchors"]
        ),
    )


def neutral_pose() -> HandPoseFrame:
    return make_frame(0.0, NEUTRAL_WRIST)


def create_session(config: SessionConfig, catalog: dict[str, ProsthesisSpec] | None = None) -> SessionState:
    """Initialize a session at tick 0 with a neutral pose."""
    if catalog is None:
        catalog = catalog_by_id()
    if config.prosthesis_id not in catalog:
        raise UnknownProsthesis(config.prosthesis_id)
    if config.task_id not in ("ball", "draw"):
        raise UnknownTask(config.task_id)
    if config.tick_rate_hz <= 0 or config.output_frame_rate_hz <= 0:
        raise BadConfig("rates must be positive")
    if config.tick_rate_hz < config.output_frame_rate_hz:
        raise BadConfig(
            f"tick rate {config.tick_rate_hz} Hz below output rate {config.output_frame_rate_hz} Hz"
        )
    ratio = config.tick_rate_hz / config.output_frame_rate_hz
    if abs(ratio - round(ratio)) > 1e-9:
        raise BadConfig("tick rate must be an integer multiple of the output rate")
    if config.replaced_limb not in ("left", "right"):
        raise BadConfig(f"replaced_limb must be 'left' or 'right', got {config.replaced_limb!r}")
    config.gesture_config.validated()

    spec = catalog[config.prosthesis_id]
    ball_cfg = draw_cfg = None
    ball = draw = None
    if config.task_id == "ball":
        ball_cfg = ball_config_from_mapping(config.task_config)
        ball = make_ball_state(ball_cfg)
    else:
        draw_cfg = draw_config_from_mapping(config.task_config)
        draw = make_draw_state(draw_cfg)

    pose = neutral_pose()
    return SessionState(
        config=config,
        spec=spec,
        ball_cfg=ball_cfg,
        draw_cfg=draw_cfg,
        tick=0,
        current_pose=pose,
        last_input_t=None,
        detector=DetectorState(),
        object_pose=object_pose(pose, spec),
        prev_proxies=None,
        prev_palm=pose.palm_position,
        ball=ball,
        draw=draw,
    )


def step(state: SessionState, input_frame=None) -> tuple[SessionState, RenderFrame | None]:
    """Advance exactly one tick; emit a frame on output-rate ticks.

    ``input_frame`` may be a validated frame, a raw pose record, or None
    (hold the last pose). Stale or malformed input is dropped with a
    ``dropped_input`` event, never an error.
    """
    tick = state.tick
    dt = state.tick_dt
    t = tick * dt
    events: list[dict] = list(state.pending_events)

    pose = state.current_pose
    last_input_t = state.last_input_t
    if input_frame is not None:
        try:
            if not isinstance(input_frame, HandPoseFrame):
                input_frame = frame_from_record(input_frame)
            if last_input_t is not None and input_frame.timestamp_s < last_input_t:
                events.append({"kind": "dropped_input", "tick": tick, "reason": "stale"})
            else:
                pose = input_frame
                last_input_t = input_frame.timestamp_s
        except LimbswapError as exc:
            events.append({"kind": "dropped_input", "tick": tick, "reason": str(exc)})

    target = object_pose(pose, state.spec)
    smoothed = smooth(
        state.object_pose, target, state.spec.motion_smoothing_alpha, dt, state.spec, tick_dt=dt
    )
    proxies = collision_proxy_world(state.spec, smoothed)
    proxies = with_proxy_velocities(proxies, state.prev_proxies, dt)

    palm = pose.palm_position
    velocity = (palm - state.prev_palm) / dt
    palm_speed = float(np.linalg.norm(velocity))
    gesture_events, detector = gesture_advance(
        state.detector,
        state.config.gesture_config,
        t,
        tick,
        pose.pinch_strength,
        pose.grab_strength,
        velocity,
    )
    events.extend(e.to_record() for e in gesture_events)

    ball, draw = state.ball, state.draw
    if ball is not None:
        ball, task_events = ball_step(
            ball,
            proxies,
            smoothed.anchors_world,
            state.spec,
            detector.grab_active,
            palm_speed,
            tick,
            dt,
            state.ball_cfg,
        )
    else:
        draw, task_events = draw_step(
            draw,
            smoothed.anchors_world,
            state.spec,
            detector.pinch_active,
            detector.grab_active,
            detector.still_active,
            tick,
            dt,
            state.draw_cfg,
        )
    events.extend(e.to_record() for e in task_events)

    frame = None
    pending: tuple[dict, ...] = tuple(events)
    emitted_ink = state.emitted_ink
    if tick % state.output_stride == 0:
        if ball is not None:
            task_view: dict = {
                "ball_position": [float(x) for x in ball.ball_position],
                "ball_velocity": [float(x) for x in ball.ball_velocity],
                "ball_radius": ball.ball_radius,
                "attached_to": ball.attached_to,
                "goal_center": [float(x) for x in ball.goal_center],
                "goal_radius": ball.goal_radius,
                "done": ball.done_tick is not None,
            }
        else:
            task_view = {
                "stroke_count": len(draw.strokes),
                "ink_count": draw.ink_count,
                "drawing": draw.drawing,
                "new_points": _points_since(draw, state.emitted_ink),
            }
            emitted_ink = draw.ink_count
        frame = RenderFrame(
            tick=tick,
            object=smoothed,
            task_view=task_view,
            events=tuple(events),
            metrics=_metrics(state.config, ball, draw, state.draw_cfg, dt),
        )
        pending = ()

    new_state = replace(
        state,
        tick=tick + 1,
        current_pose=pose,
        last_input_t=last_input_t,
        detector=detector,
        object_pose=smoothed,
        prev_proxies=proxies,
        prev_palm=palm,
        ball=ball,
        draw=draw,
        pending_events=pending,
        emitted_ink=emitted_ink,
    )
    return new_state, frame


def _points_since(draw: DrawTaskState, skip: int) -> list[dict]:
    """Ink points appended since the last emitted frame, with stroke indices."""
    out = []
    seen = 0
    for si, stroke in enumerate(draw.strokes):
        if seen + len(stroke) <= skip:
            seen += len(stroke)
            continue
        for p in stroke:
            if seen >= skip:
                out.append({"stroke": si, "point": [p[0], p[1]], "width": p[2]})
            seen += 1
    return out


def _metrics(config, ball, draw, draw_cfg, tick_dt) -> TaskMetrics:
    if ball is not None:
        return ball_metrics(ball, tick_dt)
    return draw_metrics(draw, draw_cfg)


def session_metrics(state: SessionState) -> TaskMetrics:
    return _metrics(state.config, state.ball, state.draw, state.draw_cfg, state.tick_dt)


# --- canonical serialization and hashing ---


def _canonical(value: Any) -> Any:
    """Replace every float with its IEEE-754 bit pattern, recursively.

    Hash identity is promised per build/platform, not across platforms.
    """
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return struct.pack("<d", value).hex()
    if isinstance(value, np.floating):
        return struct.pack("<d", float(value)).hex()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_canonical(float(v)) for v in value.ravel()]
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


def session_state_record(state: SessionState) -> dict:
    """Complete, serializable snapshot of a session's mutable state."""
    rec: dict = {
        "prosthesis_id": state.config.prosthesis_id,
        "task_id": state.config.task_id,
        "tick": state.tick,
        "last_input_t": state.last_input_t,
        "pose": frame_to_record(state.current_pose),
        "detector": state.detector.to_record(),
        "object": _object_record(state.object_pose),
        "prev_palm": [float(x) for x in state.prev_palm],
        "pending_events": list(state.pending_events),
        "emitted_ink": state.emitted_ink,
        "task": state.ball.to_record() if state.ball is not None else state.draw.to_record(),
    }
    return rec


def session_state_from_record(rec: dict, config: SessionConfig, catalog=None) -> SessionState:
    """Rebuild a session from its snapshot (testing aid for hash round trips)."""
    base = create_session(config, catalog)
    det_rec = rec["detector"]
    detector = DetectorState(
        pinch_active=det_rec["pinch_active"],
        grab_active=det_rec["grab_active"],
        still_active=det_rec["still_active"],
        swipe_t0=det_rec["swipe_t0"],
        swipe_sum_vx=det_rec["swipe_sum"][0],
        swipe_sum_vy=det_rec["swipe_sum"][1],
        swipe_sum_vz=det_rec["swipe_sum"][2],
        swipe_sum_speed=det_rec["swipe_sum_speed"],
        swipe_samples=det_rec["swipe_samples"],
        swipe_fired=det_rec["swipe_fired"],
        still_t0=det_rec["still_t0"],
        tick=det_rec["tick"],
    )
    ball = draw = None
    task = rec["task"]
    if base.ball is not None:
        ball = replace(
            base.ball,
            ball_position=np.array(task["ball_position"]),
            ball_velocity=np.array(task["ball_velocity"]),
            ball_radius=task["ball_radius"],
            goal_center=np.array(task["goal_center"]),
            goal_radius=task["goal_radius"],
            bounds_lo=np.array(task["bounds_lo"]),
            bounds_hi=np.array(task["bounds_hi"]),
            attached_to=task["attached_to"],
            path_length_accum=task["path_length_accum"],
            start_tick=task["start_tick"],
            done_tick=task["done_tick"],
        )
    else:
        draw = replace(
            base.draw,
            plane_point=np.array(task["plane_point"]),
            plane_normal=np.array(task["plane_normal"]),
            strokes=tuple(tuple(tuple(p) for p in s) for s in task["strokes"]),
            drawing=task["drawing"],
            ink_count=task["ink_count"],
            start_tick=task["start_tick"],
        )
    return replace(
        base,
        tick=rec["tick"],
        current_pose=frame_from_record(rec["pose"]),
        last_input_t=rec["last_input_t"],
        detector=detector,
        object_pose=_object_from_record(rec["object"]),
        prev_palm=np.array(rec["prev_palm"]),
        ball=ball,
        draw=draw,
        pending_events=tuple(rec["pending_events"]),
        emitted_ink=rec["emitted_ink"],
    )


def state_hash(state: SessionState) -> str:
    """64-bit digest over the canonical state serialization (16 hex chars)."""
    payload = json.dumps(_canonical(session_state_record(state)), sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()


def frames_digest(frames) -> str:
    """Order-sensitive 64-bit digest over rendered frames."""
    h = hashlib.blake2b(digest_size=8)
    for f in frames:
        rec = f.to_record() if isinstance(f, RenderFrame) else f
        h.update(json.dumps(_canonical(rec), sort_keys=True, separators=(",", ":")).encode())
        h.update(b"\n")
    return h.hexdigest()


# --- replay ---


@dataclass(frozen=True, eq=False)
class ReplayResult:
    final_state: SessionState
    frames: list[RenderFrame]
    metrics: TaskMetrics
    hashes: list[str]


def run_replay(
    trace: PoseTrace,
    config: SessionConfig,
    catalog: dict[str, ProsthesisSpec] | None = None,
    collect_hashes: bool = False,
) -> ReplayResult:
    """Resample the trace onto the tick grid and step it to exhaustion."""
    state = create_session(config, catalog)
    resampled = resample_trace(trace, config.tick_rate_hz)
    frames: list[RenderFrame] = []
    hashes: list[str] = []
    for input_frame in resampled.frames:
        state, frame = step(state, input_frame)
        if frame is not None:
            frames.append(frame)
            if collect_hashes:
                hashes.append(state_hash(state))
    return ReplayResult(state, frames, session_metrics(state), hashes)


# --- frame log (.frames.jsonl) ---

FRAMES_HEADER = {"format": "render-frames", "version": 1}


def record_frames(frames, sink: str | IO[str]) -> None:
    own = isinstance(sink, str)
    fh = open(sink, "w") if own else sink
    try:
        fh.write(json.dumps(FRAMES_HEADER, separators=(",", ":")) + "\n")
        for f in frames:
            rec = f.to_record() if isinstance(f, RenderFrame) else f
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    finally:
        if own:
            fh.close()


def load_frames(source: str | IO[str]) -> list[RenderFrame]:
    own = isinstance(source, str)
    fh = open(source, "r") if own else source
    try:
        first = fh.readline()
        if not first:
            raise ParseError("empty frame log", line=1)
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad header: {exc.msg}", line=1) from exc
        if header.get("format") != "render-frames" or header.get("version") != 1:
            raise ParseError("not a render-frames v1 log", line=1)
        frames = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad frame record: {exc.msg}", line=lineno) from exc
            try:
                frames.append(
                    RenderFrame(
                        tick=rec["tick"],
                        object=_object_from_record(rec["object"]),
                        task_view=rec["task_view"],
                        events=tuple(rec["events"]),
                        metrics=(
                            TaskMetrics(**rec["metrics"]) if rec["metrics"] is not None else None
                        ),
                        hand_visible=rec["hand_visible"],
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed frame record: {exc}", line=lineno) from exc
        return frames
    finally:
        if own:
            fh.close()
