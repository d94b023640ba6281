"""Hand-pose frames and traces.

A :class:`HandPoseFrame` is the engine's sole input signal: a timestamped
palm/wrist transform, five finger channels, and pinch/grab scalars. Traces
are ordered sequences of frames and stand in for a live tracker so the
whole engine runs hardware-free.

Trace files are newline-delimited JSON (``.poses.jsonl``) with the header
record ``{"format": "pose-trace", "version": 1}`` on the first line.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from . import quat
from .errors import DegenerateError, OrderError, ParseError, RangeError, TooShort

HAND_SPAN_MAX_M = 0.30  # sanity bound on |palm - wrist|
QUAT_REPAIR_TOL = 1e-3  # renormalize below this norm deviation, reject above
FINGER_NAMES = ("thumb", "index", "middle", "ring", "pinky")


@dataclass(frozen=True, eq=False)
class FingerState:
    flexion: float
    tip_position: np.ndarray


@dataclass(frozen=True, eq=False)
class HandPoseFrame:
    timestamp_s: float
    palm_position: np.ndarray
    palm_orientation: np.ndarray  # (w, x, y, z), unit
    wrist_position: np.ndarray
    fingers: tuple[FingerState, ...]  # exactly 5, thumb..pinky
    pinch_strength: float
    grab_strength: float
    confidence: float


@dataclass(frozen=True, eq=False)
class PoseTrace:
    frames: tuple[HandPoseFrame, ...]
    source_label: str = ""

    def __post_init__(self):
        if not self.frames:
            raise RangeError("trace must contain at least one frame")
        ts = [f.timestamp_s for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise OrderError("trace timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)


def _check_finite(name: str, v: np.ndarray) -> None:
    if not np.all(np.isfinite(v)):
        raise DegenerateError(f"{name} has non-finite components")


def _check_unit_interval(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DegenerateError(f"{name} is not finite")
    if x < 0.0 or x > 1.0:
        raise RangeError(f"{name} = {x} outside [0, 1]")
    return x


def validate_frame(frame) -> HandPoseFrame:
    """Validate a raw pose record (mapping) or an existing frame.

    Returns a frame satisfying every invariant. The orientation quaternion
    is renormalized when its norm deviates from 1 by at most
    ``QUAT_REPAIR_TOL``; larger deviations are rejected as degenerate.
    """
    if isinstance(frame, HandPoseFrame):
        rec = frame_to_record(frame)
    else:
        rec = frame

    try:
        t = float(rec["timestamp_s"])
        palm = quat.vec3(rec["palm_pos"])
        q = np.asarray(rec["palm_quat"], dtype=np.float64)
        wrist = quat.vec3(rec["wrist_pos"])
        raw_fingers = rec["fingers"]
        pinch = rec["pinch_strength"]
        grab = rec["grab_strength"]
        conf = rec["confidence"]
    except (KeyError, TypeError, ValueError) as exc:
        raise RangeError(f"malformed pose record: {exc}") from exc

    if not math.isfinite(t) or t < 0.0:
        raise RangeError(f"timestamp_s = {t} must be finite and >= 0")
    _check_finite("palm_pos", palm)
    _check_finite("wrist_pos", wrist)

    if q.shape != (4,):
        raise DegenerateError(f"palm_quat has shape {q.shape}, expected (4,)")
    _check_finite("palm_quat", q)
    qn = quat.norm(q)
    if qn == 0.0:
        raise DegenerateError("palm_quat is the zero quaternion")
    if abs(qn - 1.0) > QUAT_REPAIR_TOL:
        raise DegenerateError(f"palm_quat norm {qn} deviates from 1 by more than {QUAT_REPAIR_TOL}")
    if qn != 1.0:
        q = q / qn

    span = float(np.linalg.norm(palm - wrist))
    if span > HAND_SPAN_MAX_M:
        raise RangeError(f"|palm - wrist| = {span:.3f} m exceeds {HAND_SPAN_MAX_M} m")

    if len(raw_fingers) != 5:
        raise RangeError(f"expected 5 fingers, got {len(raw_fingers)}")
    fingers = []
    for i, fr in enumerate(raw_fingers):
        if isinstance(fr, FingerState):
            flex, tip = fr.flexion, fr.tip_position
        else:
            flex, tip = fr["flex"], quat.vec3(fr["tip"])
        flex = _check_unit_interval(f"fingers[{i}].flex", flex)
        _check_finite(f"fingers[{i}].tip", tip)
        fingers.append(FingerState(flex, np.asarray(tip, dtype=np.float64)))

    return HandPoseFrame(
        timestamp_s=t,
        palm_position=palm,
        palm_orientation=q,
        wrist_position=wrist,
        fingers=tuple(fingers),
        pinch_strength=_check_unit_interval("pinch_strength", pinch),
        grab_strength=_check_unit_interval("grab_strength", grab),
        confidence=_check_unit_interval("confidence", conf),
    )


def interpolate(a: HandPoseFrame, b: HandPoseFrame, t: float) -> HandPoseFrame:
    """Blend two frames at fraction ``t`` in [0, 1].

    Positions, flexions and strengths interpolate linearly; orientation
    follows the shorter great-circle arc; the timestamp is the lerp of the
    endpoints.
    """
    if b.timestamp_s <= a.timestamp_s:
        raise OrderError("interpolate requires a.timestamp_s < b.timestamp_s")
    if not 0.0 <= t <= 1.0:
        raise RangeError(f"interpolation fraction {t} outside [0, 1]")
    if t == 0.0:
        return a
    if t == 1.0:
        return b

    def lerp(x, y):
        return x + (y - x) * t

    fingers = tuple(
        FingerState(lerp(fa.flexion, fb.flexion), lerp(fa.tip_position, fb.tip_position))
        for fa, fb in zip(a.fingers, b.fingers)
    )
    return HandPoseFrame(
        timestamp_s=lerp(a.timestamp_s, b.timestamp_s),
        palm_position=lerp(a.palm_position, b.palm_position),
        palm_orientation=quat.slerp(a.palm_orientation, b.palm_orientation, t),
        wrist_position=lerp(a.wrist_position, b.wrist_position),
        fingers=fingers,
        pinch_strength=lerp(a.pinch_strength, b.pinch_strength),
        grab_strength=lerp(a.grab_strength, b.grab_strength),
        confidence=lerp(a.confidence, b.confidence),
    )


def frame_at(trace: PoseTrace, t: float) -> HandPoseFrame:
    """Frame at time ``t``, interpolated between bracketing inputs.

    Clamps to the first/last frame outside the trace span.
    """
    frames = trace.frames
    ts = [f.timestamp_s for f in frames]
    if t <= ts[0]:
        return frames[0]
    if t >= ts[-1]:
        return frames[-1]
    hi = bisect_right(ts, t)
    a, b = frames[hi - 1], frames[hi]
    if t == a.timestamp_s:
        return a
    return interpolate(a, b, (t - a.timestamp_s) / (b.timestamp_s - a.timestamp_s))


def resample_trace(trace: PoseTrace, rate_hz: float) -> PoseTrace:
    """Resample onto a regular grid anchored at the first timestamp.

    Output frames sit at ``first + k/rate_hz``; the original last frame is
    appended when the span is not an exact multiple of the step, so both
    endpoints are always preserved. Resampling a trace already on the grid
    is the identity.
    """
    if not (rate_hz > 0 and math.isfinite(rate_hz)):
        raise RangeError(f"rate_hz = {rate_hz} must be positive and finite")
    frames = trace.frames
    if len(frames) == 1:
        return trace
    first = frames[0].timestamp_s
    last = frames[-1].timestamp_s
    dt = 1.0 / rate_hz
    n = int(math.floor((last - first) / dt + 1e-9))
    out = [frame_at(trace, first + k * dt) for k in range(n + 1)]
    if out[-1].timestamp_s < last - 1e-9:
        out.append(frames[-1])
    return PoseTrace(tuple(out), source_label=trace.source_label)


def palm_velocity(trace: PoseTrace, index: int) -> np.ndarray:
    """Palm velocity (m/s) by central difference; one-sided at the ends."""
    frames = trace.frames
    if len(frames) < 2:
        raise TooShort("palm_velocity needs at least 2 frames")
    if not 0 <= index < len(frames):
        raise IndexError(f"frame index {index} out of range")
    lo = max(0, index - 1)
    hi = min(len(frames) - 1, index + 1)
    a, b = frames[lo], frames[hi]
    return (b.palm_position - a.palm_position) / (b.timestamp_s - a.timestamp_s)


# --- trace file format (.poses.jsonl) ---

TRACE_HEADER = {"format": "pose-trace", "version": 1}


def frame_to_record(f: HandPoseFrame) -> dict:
    return {
        "timestamp_s": f.timestamp_s,
        "palm_pos": [float(x) for x in f.palm_position],
        "palm_quat": [float(x) for x in f.palm_orientation],
        "wrist_pos": [float(x) for x in f.wrist_position],
        "fingers": [
            {"flex": fi.flexion, "tip": [float(x) for x in fi.tip_position]} for fi in f.fingers
        ],
        "pinch_strength": f.pinch_strength,
        "grab_strength": f.grab_strength,
        "confidence": f.confidence,
    }


def frame_from_record(rec: dict) -> HandPoseFrame:
    return validate_frame(rec)


def save_trace(trace: PoseTrace, sink: str | IO[str]) -> None:
    own = isinstance(sink, str)
    fh = open(sink, "w") if own else sink
    try:
        fh.write(json.dumps(TRACE_HEADER, separators=(",", ":")) + "\n")
        for f in trace.frames:
            fh.write(json.dumps(frame_to_record(f), separators=(",", ":")) + "\n")
    finally:
        if own:
            fh.close()


def load_trace(source: str | IO[str], source_label: str | None = None) -> PoseTrace:
    own = isinstance(source, str)
    fh = open(source, "r") if own else source
    label = source_label if source_label is not None else (source if own else "stream")
    try:
        first = fh.readline()
        if not first:
            raise ParseError("empty trace file", line=1)
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad header: {exc.msg}", line=1) from exc
        if header.get("format") != "pose-trace":
            raise ParseError(f"not a pose-trace file (format={header.get('format')!r})", line=1)
        if header.get("version") != 1:
            raise ParseError(f"unsupported pose-trace version {header.get('version')!r}", line=1)
        frames = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad frame record: {exc.msg}", line=lineno) from exc
            frames.append(frame_from_record(rec))
        if not frames:
            raise ParseError("trace file contains no frames", line=2)
        return PoseTrace(tuple(frames), source_label=str(label))
    finally:
        if own:
            fh.close()


def frames_allclose(a: HandPoseFrame, b: HandPoseFrame, tol: float = 1e-9) -> bool:
    """Field-wise comparison helper used by tests and golden checks."""

    def close(x, y):
        return bool(np.all(np.abs(np.asarray(x) - np.asarray(y)) <= tol))

    return (
        close(a.timestamp_s, b.timestamp_s)
        and close(a.palm_position, b.palm_position)
        and close(a.palm_orientation, b.palm_orientation)
        and close(a.wrist_position, b.wrist_position)
        and all(
            close(fa.flexion, fb.flexion) and close(fa.tip_position, fb.tip_position)
            for fa, fb in zip(a.fingers, b.fingers)
        )
        and close(a.pinch_strength, b.pinch_strength)
        and close(a.grab_strength, b.grab_strength)
        and close(a.confidence, b.confidence)
    )
