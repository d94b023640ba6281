"""Deterministic synthetic hand-pose traces.

Each generator is a pure function of its parameters: the same script at the
same sample rate yields a bit-identical trace. The generated hand points its
tool axis at the screen (palm rotated 180 degrees about +Y), so catalog
prostheses extend toward world -Z and the drawing canvas at z=0 sits in
front of the hand.

Generators:

- ``hold_still(duration_s)`` -- frozen neutral pose.
- ``reach_and_swipe(speed, direction)`` -- reach in, attempt a grab, then a
  constant-speed swipe through the interaction zone, then settle.
- ``pen_stroke(polyline, depth_m)`` -- press a tool tip to the canvas and
  trace a polyline at constant depth.
- ``airbrush_sweep(path, trigger_windows)`` -- hover above the canvas and
  sweep, pinching during the given windows.
- ``sinusoid(amplitude, frequency_hz)`` -- oscillating palm, for smoothing
  and velocity checks.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

import numpy as np

from . import quat
from .errors import BadParameter, UnknownGenerator
from .pose import FingerState, HandPoseFrame, PoseTrace

DEFAULT_RATE_HZ = 120.0

# Palm faces the screen: tool axis (wrist-local +Z) maps to world -Z.
HAND_ORIENTATION = quat.from_axis_angle((0.0, 1.0, 0.0), math.pi)

_PALM_OFFSET = np.array([0.0, 0.0, 0.09])
_FINGER_OFFSETS = (
    np.array([-0.045, 0.0, 0.035]),
    np.array([-0.020, 0.0, 0.075]),
    np.array([0.000, 0.0, 0.080]),
    np.array([0.020, 0.0, 0.075]),
    np.array([0.040, 0.0, 0.060]),
)


def make_frame(
    t: float,
    wrist,
    orientation=HAND_ORIENTATION,
    pinch: float = 0.0,
    grab: float = 0.0,
    flexions=(0.0,) * 5,
    tip_overrides: Mapping[int, np.ndarray] | None = None,
) -> HandPoseFrame:
    """Assemble a valid frame from a wrist position and channel values."""
    wrist = quat.vec3(wrist)
    orientation = np.asarray(orientation, dtype=np.float64)
    palm = wrist + quat.rotate(orientation, _PALM_OFFSET)
    fingers = []
    for i, base in enumerate(_FINGER_OFFSETS):
        if tip_overrides is not None and i in tip_overrides:
            tip = np.asarray(tip_overrides[i], dtype=np.float64)
        else:
            local = base.copy()
            local[2] *= 1.0 - 0.6 * flexions[i]  # curled fingers shorten
            tip = palm + quat.rotate(orientation, local)
        fingers.append(FingerState(float(flexions[i]), tip))
    return HandPoseFrame(
        timestamp_s=float(t),
        palm_position=palm,
        palm_orientation=orientation,
        wrist_position=wrist,
        fingers=tuple(fingers),
        pinch_strength=float(pinch),
        grab_strength=float(grab),
        confidence=1.0,
    )


def _unit(v, name: str) -> np.ndarray:
    v = quat.vec3(v)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not math.isfinite(n):
        raise BadParameter(f"{name} must be a nonzero finite vector")
    return v / n


def _ramp(t: float, t0: float, t1: float) -> float:
    """Linear 0..1 ramp over [t0, t1], clamped."""
    if t <= t0:
        return 0.0
    if t >= t1:
        return 1.0
    return (t - t0) / (t1 - t0)


def _polyline_lengths(pts: list[np.ndarray]) -> list[float]:
    return [float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])]


def _point_along(pts: list[np.ndarray], lengths: list[float], s: float) -> np.ndarray:
    total = sum(lengths)
    s = min(max(s, 0.0), total)
    for a, b, seg in zip(pts, pts[1:], lengths):
        if s <= seg:
            return a if seg == 0.0 else a + (b - a) * (s / seg)
        s -= seg
    return pts[-1]


def _as_xy(points, name: str) -> list[np.ndarray]:
    out = []
    for i, p in enumerate(points):
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (2,) or not np.all(np.isfinite(p)):
            raise BadParameter(f"{name}[{i}] must be a finite 2-D point")
        out.append(p)
    if len(out) < 2:
        raise BadParameter(f"{name} needs at least 2 points")
    return out


# Each builder returns (duration_s, sample(t) -> HandPoseFrame, phases).
_Builder = Callable[..., tuple[float, Callable[[float], HandPoseFrame], dict]]


def _build_hold_still(*, duration_s: float = 1.0, position=(0.0, 0.0, 0.30)):
    if not duration_s > 0:
        raise BadParameter("duration_s must be positive")
    wrist = quat.vec3(position)

    def sample(t: float) -> HandPoseFrame:
        return make_frame(t, wrist)

    return duration_s, sample, {"still": (0.0, duration_s)}


def _build_reach_and_swipe(
    *,
    speed: float = 1.5,
    direction=(1.0, 0.0, 0.0),
    start=(-0.45, 0.0, 0.22),
    reach_dist: float = 0.15,
    still_s: float = 0.15,
    pause_s: float = 0.10,
    swipe_len: float = 0.55,
    tail_s: float = 2.4,
):
    if not speed > 0:
        raise BadParameter("speed must be positive")
    if not (reach_dist > 0 and swipe_len > 0 and tail_s >= 0):
        raise BadParameter("distances must be positive")
    d = _unit(direction, "direction")
    p0 = quat.vec3(start)
    p1 = p0 + d * reach_dist
    p2 = p1 + d * swipe_len
    reach_s = reach_dist / (0.25 * speed)  # reach stays well under swipe speed
    swipe_s = swipe_len / speed
    t_reach = still_s
    t_pause = t_reach + reach_s
    t_swipe = t_pause + pause_s
    t_tail = t_swipe + swipe_s
    duration = t_tail + tail_s
    release_s = min(0.2, tail_s) if tail_s > 0 else 0.0

    def sample(t: float) -> HandPoseFrame:
        if t < t_reach:
            wrist = p0
        elif t < t_pause:
            wrist = p0 + d * (0.25 * speed * (t - t_reach))
        elif t < t_swipe:
            wrist = p1
        elif t < t_tail:
            wrist = p1 + d * (speed * (t - t_swipe))
        else:
            wrist = p2
        grab = _ramp(t, t_reach, t_pause)
        if t >= t_tail and release_s > 0:
            grab = 1.0 - _ramp(t, t_tail, t_tail + release_s)
        return make_frame(t, wrist, grab=grab)

    phases = {
        "still": (0.0, t_reach),
        "reach": (t_reach, t_pause),
        "pause": (t_pause, t_swipe),
        "swipe": (t_swipe, t_tail),
        "tail": (t_tail, duration),
    }
    return duration, sample, phases


def _build_pen_stroke(
    *,
    polyline=((-0.12, -0.04), (0.08, -0.04), (0.08, 0.06)),
    depth_m: float = 0.003,
    tip_offset=(0.0, 0.0, 0.15),
    hover_m: float = 0.05,
    draw_speed: float = 0.15,
    approach_s: float = 0.25,
    hover_s: float = 0.30,
):
    pts = _as_xy(polyline, "polyline")
    if not (hover_m > 0 and draw_speed > 0 and approach_s > 0 and hover_s >= 0):
        raise BadParameter("hover_m, draw_speed and approach_s must be positive")
    lengths = _polyline_lengths(pts)
    total = sum(lengths)
    if total <= 0:
        raise BadParameter("polyline has zero length")
    offset = quat.vec3(tip_offset)
    stroke_s = total / draw_speed
    t_descend = hover_s
    t_stroke = t_descend + approach_s
    t_ascend = t_stroke + stroke_s
    t_settle = t_ascend + approach_s
    duration = t_settle + hover_s

    def tool_point(t: float) -> np.ndarray:
        if t < t_descend:
            xy, z = pts[0], hover_m
        elif t < t_stroke:
            xy = pts[0]
            z = hover_m + (t - t_descend) / approach_s * (-depth_m - hover_m)
        elif t <= t_ascend:
            xy = _point_along(pts, lengths, draw_speed * (t - t_stroke))
            z = -depth_m  # constant by construction during the stroke
        elif t < t_settle:
            xy = pts[-1]
            z = -depth_m + (t - t_ascend) / approach_s * (hover_m + depth_m)
        else:
            xy, z = pts[-1], hover_m
        return np.array([xy[0], xy[1], z])

    def sample(t: float) -> HandPoseFrame:
        tool = tool_point(t)
        wrist = tool - quat.rotate(HAND_ORIENTATION, offset)
        return make_frame(t, wrist, tip_overrides={1: tool})

    phases = {
        "hover": (0.0, t_descend),
        "descend": (t_descend, t_stroke),
        "stroke": (t_stroke, t_ascend),
        "ascend": (t_ascend, t_settle),
        "settle": (t_settle, duration),
    }
    return duration, sample, phases


def _build_airbrush_sweep(
    *,
    path=((-0.15, 0.0), (0.15, 0.0)),
    trigger_windows=((0.2, 0.8),),
    height_m: float = 0.12,
    nozzle_offset=(0.0, 0.0, 0.15),
    sweep_speed: float = 0.25,
    lead_s: float = 0.3,
    tail_s: float = 0.3,
    ramp_s: float = 0.05,
):
    pts = _as_xy(path, "path")
    if not (height_m >= 0 and sweep_speed > 0 and ramp_s > 0):
        raise BadParameter("height_m, sweep_speed and ramp_s must be valid")
    lengths = _polyline_lengths(pts)
    total = sum(lengths)
    if total <= 0:
        raise BadParameter("path has zero length")
    offset = quat.vec3(nozzle_offset)
    sweep_s = total / sweep_speed
    t_sweep = lead_s
    t_tail = t_sweep + sweep_s
    duration = t_tail + tail_s

    windows = []
    for i, w in enumerate(trigger_windows):
        a, b = float(w[0]), float(w[1])
        if not (0.0 <= a < b <= 1.0):
            raise BadParameter(f"trigger_windows[{i}] must satisfy 0 <= a < b <= 1")
        windows.append((t_sweep + a * sweep_s, t_sweep + b * sweep_s))

    def pinch_at(t: float) -> float:
        for a, b in windows:
            if a <= t <= b:
                up = _ramp(t, a, min(a + ramp_s, b))
                down = 1.0 - _ramp(t, max(b - ramp_s, a), b)
                return min(up, down)
        return 0.0

    def sample(t: float) -> HandPoseFrame:
        if t < t_sweep:
            xy = pts[0]
        elif t <= t_tail:
            xy = _point_along(pts, lengths, sweep_speed * (t - t_sweep))
        else:
            xy = pts[-1]
        nozzle = np.array([xy[0], xy[1], height_m])
        wrist = nozzle - quat.rotate(HAND_ORIENTATION, offset)
        return make_frame(t, wrist, pinch=pinch_at(t))

    phases = {
        "lead": (0.0, t_sweep),
        "sweep": (t_sweep, t_tail),
        "tail": (t_tail, duration),
        **{f"trigger_{i}": w for i, w in enumerate(windows)},
    }
    return duration, sample, phases


def _build_sinusoid(
    *,
    amplitude: float = 0.08,
    frequency_hz: float = 1.0,
    axis=(1.0, 0.0, 0.0),
    duration_s: float = 2.0,
    center=(0.0, 0.0, 0.25),
):
    if not (amplitude > 0 and frequency_hz > 0 and duration_s > 0):
        raise BadParameter("amplitude, frequency_hz and duration_s must be positive")
    a = _unit(axis, "axis")
    c = quat.vec3(center)
    omega = 2.0 * math.pi * frequency_hz

    def sample(t: float) -> HandPoseFrame:
        return make_frame(t, c + a * (amplitude * math.sin(omega * t)))

    return duration_s, sample, {"oscillate": (0.0, duration_s)}


GENERATORS: dict[str, _Builder] = {
    "hold_still": _build_hold_still,
    "reach_and_swipe": _build_reach_and_swipe,
    "pen_stroke": _build_pen_stroke,
    "airbrush_sweep": _build_airbrush_sweep,
    "sinusoid": _build_sinusoid,
}


def _resolve(script, params: dict) -> tuple[str, dict]:
    if isinstance(script, str):
        name = script
        merged = dict(params)
    elif isinstance(script, Mapping):
        merged = dict(script)
        name = merged.pop("generator", None)
        merged.update(params)
        if not isinstance(name, str):
            raise BadParameter("script mapping needs a 'generator' name")
    else:
        raise BadParameter(f"script must be a name or mapping, got {type(script).__name__}")
    if name not in GENERATORS:
        raise UnknownGenerator(name)
    return name, merged


def _build(script, params: dict):
    name, merged = _resolve(script, params)
    rate_hz = float(merged.pop("rate_hz", DEFAULT_RATE_HZ))
    if not rate_hz > 0:
        raise BadParameter("rate_hz must be positive")
    try:
        duration, sample, phases = GENERATORS[name](**merged)
    except TypeError as exc:
        raise BadParameter(f"{name}: {exc}") from exc
    return name, rate_hz, duration, sample, phases


def synth_trace(script, **params) -> PoseTrace:
    """Generate a trace from a builtin script.

    ``script`` is either a generator name (parameters as keyword arguments)
    or a JSON-style mapping with a ``generator`` key. ``rate_hz`` defaults
    to 120.
    """
    name, rate_hz, duration, sample, _ = _build(script, params)
    dt = 1.0 / rate_hz
    n = int(math.floor(duration * rate_hz + 1e-9))
    frames = tuple(sample(k * dt) for k in range(n + 1))
    return PoseTrace(frames, source_label=f"synth:{name}")


def phase_windows(script, **params) -> dict[str, tuple[float, float]]:
    """Time windows (seconds) of each named phase of a script."""
    _, _, _, _, phases = _build(script, params)
    return phases
