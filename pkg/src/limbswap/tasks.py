"""The two interaction tasks: moving a virtual ball and line drawing.

Mechanics are differentiated by the prosthesis's declared affordances:

- ``push`` makes contact impart an impulse (gain x approach speed along the
  contact normal, ball mass normalized to 1).
- ``delicate_touch`` gates contact on palm speed: above the declared
  ``max_speed`` a touch imparts exactly nothing.
- ``grab_attach`` lets a grip anchor pick the ball up while the grab
  gesture is held.
- Drawing is contact-driven for tip-anchored objects (pen, paintbrush) and
  trigger-driven through a ray for nozzle-anchored ones (airbrush).

Step functions are pure: (state, inputs) -> (state, events). Gravity is
off; the ball lives in a damped 2.5-D tabletop world.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import quat
from .errors import BadConfig
from .prosthesis import ProsthesisSpec, action_gesture, find_action
from .retarget import ProxySphere, WorldAnchor

TASK_IDS = ("ball", "draw")


@dataclass(frozen=True)
class TaskEvent:
    kind: str
    tick: int
    detail: tuple[tuple[str, float], ...] = ()

    def to_record(self) -> dict:
        rec: dict = {"kind": self.kind, "tick": self.tick}
        rec.update({k: v for k, v in self.detail})
        return rec


# --- ball task ---


@dataclass(frozen=True)
class BallTaskConfig:
    ball_radius: float = 0.05
    damping: float = 2.0  # 1/s exponential velocity decay
    restitution: float = 0.5
    grab_radius: float = 0.08
    goal_speed_eps: float = 0.05
    default_impulse_gain: float = 1.0
    start: tuple[float, float, float] = (0.0, 0.0, 0.15)
    goal_center: tuple[float, float, float] = (0.42, 0.0, 0.15)
    goal_radius: float = 0.15
    bounds_lo: tuple[float, float, float] = (-0.6, -0.4, -0.1)
    bounds_hi: tuple[float, float, float] = (0.6, 0.4, 0.5)


@dataclass(frozen=True, eq=False)
class BallTaskState:
    ball_position: np.ndarray
    ball_velocity: np.ndarray
    ball_radius: float
    goal_center: np.ndarray
    goal_radius: float
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    attached_to: str | None = None
    path_length_accum: float = 0.0
    start_tick: int | None = None
    done_tick: int | None = None
    start_position: np.ndarray | None = None

    def to_record(self) -> dict:
        return {
            "ball_position": [float(x) for x in self.ball_position],
            "ball_velocity": [float(x) for x in self.ball_velocity],
            "ball_radius": self.ball_radius,
            "goal_center": [float(x) for x in self.goal_center],
            "goal_radius": self.goal_radius,
            "bounds_lo": [float(x) for x in self.bounds_lo],
            "bounds_hi": [float(x) for x in self.bounds_hi],
            "attached_to": self.attached_to,
            "path_length_accum": self.path_length_accum,
            "start_tick": self.start_tick,
            "done_tick": self.done_tick,
        }


def make_ball_state(cfg: BallTaskConfig) -> BallTaskState:
    start = quat.vec3(cfg.start)
    return BallTaskState(
        ball_position=start,
        ball_velocity=np.zeros(3),
        ball_radius=cfg.ball_radius,
        goal_center=quat.vec3(cfg.goal_center),
        goal_radius=cfg.goal_radius,
        bounds_lo=quat.vec3(cfg.bounds_lo),
        bounds_hi=quat.vec3(cfg.bounds_hi),
        start_position=start,
    )


def _grip_anchor(anchors: tuple[WorldAnchor, ...]) -> WorldAnchor | None:
    for a in anchors:
        if a.role == "grip":
            return a
    return None


def ball_step(
    state: BallTaskState,
    proxies: tuple[ProxySphere, ...],
    anchors: tuple[WorldAnchor, ...],
    spec: ProsthesisSpec,
    grab_active: bool,
    palm_speed: float,
    tick: int,
    dt: float,
    cfg: BallTaskConfig,
) -> tuple[BallTaskState, list[TaskEvent]]:
    if not 0.0 < dt <= 0.1:
        raise BadConfig(f"dt = {dt} outside (0, 0.1]")
    events: list[TaskEvent] = []
    pos = state.ball_position
    vel = state.ball_velocity * math.exp(-cfg.damping * dt)
    attached = state.attached_to
    start_tick = state.start_tick if state.start_tick is not None else tick
    path = state.path_length_accum

    push = find_action(spec, "push")
    delicate = find_action(spec, "delicate_touch")
    can_grab = find_action(spec, "grab_attach") is not None

    if attached is not None and not grab_active:
        events.append(TaskEvent("ball_released", tick))
        attached = None

    if attached is None:
        # Contact impulses, proxy by proxy in declaration order.
        for p in proxies:
            delta = pos - p.center
            dist = float(np.linalg.norm(delta))
            if dist <= 1e-12 or dist > p.radius + state.ball_radius:
                continue
            n = delta / dist
            approach = float(np.dot(p.velocity - vel, n))
            if approach <= 0.0:
                continue
            if delicate is not None and palm_speed > delicate.max_speed:
                continue  # too fast for a delicate object: imparts nothing
            if push is not None:
                gain = push.impulse_gain
            elif delicate is not None:
                gain = cfg.default_impulse_gain
            else:
                continue
            impulse = gain * approach
            vel = vel + impulse * n
            events.append(TaskEvent("ball_contact", tick, (("impulse", impulse),)))

        if can_grab and grab_active:
            grip = _grip_anchor(anchors)
            if grip is not None and float(np.linalg.norm(grip.position - pos)) <= cfg.grab_radius:
                attached = grip.name
                events.append(TaskEvent("ball_attached", tick))

    if attached is not None:
        grip = _grip_anchor(anchors)
        if grip is not None:
            new_pos = grip.position.copy()
            vel = (new_pos - pos) / dt
            path += float(np.linalg.norm(new_pos - pos))
            pos = new_pos
    else:
        step_dist = float(np.linalg.norm(vel)) * dt
        pos = pos + vel * dt
        path += step_dist
        # Reflect off the bounds with restitution; clamp as a backstop.
        lo = state.bounds_lo + state.ball_radius
        hi = state.bounds_hi - state.ball_radius
        p = pos.copy()
        v = vel.copy()
        for i in range(3):
            if p[i] < lo[i]:
                p[i] = lo[i] + (lo[i] - p[i])
                v[i] = -v[i] * cfg.restitution
            elif p[i] > hi[i]:
                p[i] = hi[i] - (p[i] - hi[i])
                v[i] = -v[i] * cfg.restitution
            if p[i] < lo[i] or p[i] > hi[i]:
                p[i] = min(max(p[i], lo[i]), hi[i])
        pos, vel = p, v

    done_tick = state.done_tick
    if done_tick is None:
        speed = float(np.linalg.norm(vel))
        if speed <= cfg.goal_speed_eps and float(np.linalg.norm(pos - state.goal_center)) <= state.goal_radius:
            done_tick = tick
            events.append(TaskEvent("ball_goal", tick))

    return (
        replace(
            state,
            ball_position=pos,
            ball_velocity=vel,
            attached_to=attached,
            path_length_accum=path,
            start_tick=start_tick,
            done_tick=done_tick,
        ),
        events,
    )


# --- draw task ---


@dataclass(frozen=True)
class DrawTaskConfig:
    plane_point: tuple[float, float, float] = (0.0, 0.0, 0.0)
    plane_normal: tuple[float, float, float] = (0.0, 0.0, 1.0)
    contact_threshold: float = 0.005  # m
    base_width: float = 0.002
    spot_base: float = 0.004
    spot_spread: float = 0.05  # width per meter of nozzle distance
    cover_radius: float = 0.005
    target_polyline: tuple[tuple[float, float], ...] | None = None
    ink_budget: int | None = None


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic in-plane axes (u, v) for a unit normal."""
    n = normal
    ref = np.array([0.0, 1.0, 0.0]) if abs(float(n[1])) <= 0.9 else np.array([0.0, 0.0, 1.0])
    u = np.cross(ref, n)
    u = u / np.linalg.norm(u)
    return u, np.cross(n, u)


def ray_plane(origin, direction, plane_point, plane_normal) -> np.ndarray | None:
    """Ray/plane intersection; None when parallel or hitting behind the origin."""
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    plane_point = np.asarray(plane_point, dtype=np.float64)
    n = np.asarray(plane_normal, dtype=np.float64)
    denom = direction[0] * n[0] + direction[1] * n[1] + direction[2] * n[2]
    if abs(denom) < 1e-9:
        return None
    rel = plane_point - origin
    t = (rel[0] * n[0] + rel[1] * n[1] + rel[2] * n[2]) / denom
    if t < 0.0:
        return None
    return origin + direction * t


@dataclass(frozen=True, eq=False)
class DrawTaskState:
    plane_point: np.ndarray
    plane_normal: np.ndarray
    strokes: tuple[tuple[tuple[float, float, float], ...], ...] = ()  # (x, y, width)
    drawing: bool = False
    ink_count: int = 0
    start_tick: int | None = None

    def to_record(self) -> dict:
        return {
            "plane_point": [float(x) for x in self.plane_point],
            "plane_normal": [float(x) for x in self.plane_normal],
            "strokes": [[list(p) for p in s] for s in self.strokes],
            "drawing": self.drawing,
            "ink_count": self.ink_count,
            "start_tick": self.start_tick,
        }


def make_draw_state(cfg: DrawTaskConfig) -> DrawTaskState:
    n = quat.vec3(cfg.plane_normal)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise BadConfig("plane_normal must be nonzero")
    return DrawTaskState(plane_point=quat.vec3(cfg.plane_point), plane_normal=n / norm)


def _role_anchor(anchors: tuple[WorldAnchor, ...], role: str) -> WorldAnchor | None:
    for a in anchors:
        if a.role == role:
            return a
    return None


def _gesture_active(gesture: str | None, pinch_active: bool, grab_active: bool, still_active: bool) -> bool:
    if gesture == "pinch":
        return pinch_active
    if gesture == "grab":
        return grab_active
    if gesture == "stillness":
        return still_active
    return False


def draw_step(
    state: DrawTaskState,
    anchors: tuple[WorldAnchor, ...],
    spec: ProsthesisSpec,
    pinch_active: bool,
    grab_active: bool,
    still_active: bool,
    tick: int,
    dt: float,
    cfg: DrawTaskConfig,
) -> tuple[DrawTaskState, list[TaskEvent]]:
    if not 0.0 < dt <= 0.1:
        raise BadConfig(f"dt = {dt} outside (0, 0.1]")
    start_tick = state.start_tick if state.start_tick is not None else tick
    nozzle = _role_anchor(anchors, "nozzle")
    tip = _role_anchor(anchors, "tip")
    n = state.plane_normal
    u, v = plane_basis(n)

    point: np.ndarray | None = None
    width = 0.0
    if nozzle is not None:
        trig = find_action(spec, "trigger")
        active = trig is not None and _gesture_active(
            action_gesture(spec, "trigger"), pinch_active, grab_active, still_active
        )
        if active:
            hit = ray_plane(nozzle.position, nozzle.direction, state.plane_point, n)
            if hit is not None:
                point = hit
                width = cfg.spot_base + cfg.spot_spread * float(np.linalg.norm(hit - nozzle.position))
    elif tip is not None:
        d = float(np.dot(tip.position - state.plane_point, n))
        if d <= cfg.contact_threshold:
            penetration = max(0.0, -d)
            point = tip.position - d * n  # orthogonal projection onto the plane
            width = cfg.base_width * (1.0 + penetration / cfg.contact_threshold)

    events: list[TaskEvent] = []
    strokes = state.strokes
    drawing = state.drawing
    ink_count = state.ink_count
    if point is not None and (cfg.ink_budget is None or ink_count < cfg.ink_budget):
        rel = point - state.plane_point
        entry = (float(np.dot(rel, u)), float(np.dot(rel, v)), float(width))
        if not drawing:
            strokes = strokes + ((entry,),)
            events.append(TaskEvent("stroke_start", tick))
        else:
            strokes = strokes[:-1] + (strokes[-1] + (entry,),)
        drawing = True
        ink_count += 1
    elif drawing:
        drawing = False
        events.append(TaskEvent("stroke_end", tick))

    return (
        replace(
            state,
            strokes=strokes,
            drawing=drawing,
            ink_count=ink_count,
            start_tick=start_tick,
        ),
        events,
    )


# --- metrics ---


@dataclass(frozen=True)
class TaskMetrics:
    time_to_goal_s: float | None = None
    path_efficiency: float | None = None
    stroke_rms_deviation_m: float | None = None
    ink_coverage: float | None = None

    def to_record(self) -> dict:
        return {
            "time_to_goal_s": self.time_to_goal_s,
            "path_efficiency": self.path_efficiency,
            "stroke_rms_deviation_m": self.stroke_rms_deviation_m,
            "ink_coverage": self.ink_coverage,
        }


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float(np.dot(p - a, ab)) / denom))
    return float(np.linalg.norm(p - (a + ab * t)))


def _min_dist_to_polyline(p: np.ndarray, poly: np.ndarray) -> float:
    if len(poly) == 1:
        return float(np.linalg.norm(p - poly[0]))
    return min(_point_segment_dist(p, poly[i], poly[i + 1]) for i in range(len(poly) - 1))


def ball_metrics(state: BallTaskState, tick_dt: float) -> TaskMetrics:
    if state.done_tick is None or state.start_tick is None or state.start_position is None:
        return TaskMetrics()
    time_to_goal = (state.done_tick - state.start_tick) * tick_dt
    straight = float(np.linalg.norm(state.ball_position - state.start_position))
    eff = None
    if state.path_length_accum > 0:
        eff = min(1.0, straight / state.path_length_accum)
    return TaskMetrics(time_to_goal_s=time_to_goal, path_efficiency=eff)


def draw_metrics(state: DrawTaskState, cfg: DrawTaskConfig) -> TaskMetrics:
    if cfg.target_polyline is None:
        return TaskMetrics()
    ink = np.array([[p[0], p[1]] for s in state.strokes for p in s])
    if len(ink) == 0:
        return TaskMetrics(ink_coverage=0.0)
    target = np.array(cfg.target_polyline, dtype=np.float64)
    dists = [_min_dist_to_polyline(p, target) for p in ink]
    rms = math.sqrt(sum(d * d for d in dists) / len(dists))
    covered = sum(
        1 for vtx in target if float(np.min(np.linalg.norm(ink - vtx, axis=1))) <= cfg.cover_radius
    )
    return TaskMetrics(stroke_rms_deviation_m=rms, ink_coverage=covered / len(target))


# --- config parsing ---


def _config_from_mapping(cls, overrides: dict | None, label: str):
    if not overrides:
        return cls()
    known = set(cls.__dataclass_fields__)
    unknown = set(overrides) - known
    if unknown:
        raise BadConfig(f"unknown {label} config key(s): {sorted(unknown)}")
    kwargs = dict(overrides)
    for key in ("start", "goal_center", "bounds_lo", "bounds_hi", "plane_point", "plane_normal"):
        if key in kwargs:
            kwargs[key] = tuple(float(x) for x in kwargs[key])
    if "target_polyline" in kwargs and kwargs["target_polyline"] is not None:
        kwargs["target_polyline"] = tuple(
            (float(p[0]), float(p[1])) for p in kwargs["target_polyline"]
        )
    return cls(**kwargs)


def ball_config_from_mapping(overrides: dict | None) -> BallTaskConfig:
    return _config_from_mapping(BallTaskConfig, overrides, "ball")


def draw_config_from_mapping(overrides: dict | None) -> DrawTaskConfig:
    return _config_from_mapping(DrawTaskConfig, overrides, "draw")
