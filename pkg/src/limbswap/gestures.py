"""Gesture discretization with hysteresis.

Continuous pinch/grab strengths become start/end events via separate start
and end thresholds (start > end), so a noisy signal oscillating between
them produces no chatter. Swipes fire once per sustained fast-motion
episode; stillness brackets slow intervals.

The detector state is a value: every update returns a new state, the
caller owns threading it through. One state per session.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadConfig
from .pose import HandPoseFrame


@dataclass(frozen=True)
class GestureConfig:
    pinch_start: float = 0.8
    pinch_end: float = 0.6
    grab_start: float = 0.8
    grab_end: float = 0.6
    swipe_speed_min: float = 1.0  # m/s
    swipe_min_duration_s: float = 0.05
    still_eps: float = 0.02  # m/s
    still_min_duration_s: float = 0.3

    def validated(self) -> "GestureConfig":
        if not (0.0 <= self.pinch_end < self.pinch_start <= 1.0):
            raise BadConfig("pinch thresholds must satisfy 0 <= end < start <= 1")
        if not (0.0 <= self.grab_end < self.grab_start <= 1.0):
            raise BadConfig("grab thresholds must satisfy 0 <= end < start <= 1")
        if self.swipe_speed_min <= 0 or self.swipe_min_duration_s < 0:
            raise BadConfig("swipe thresholds must be positive")
        if self.still_eps <= 0 or self.still_min_duration_s < 0:
            raise BadConfig("stillness thresholds must be positive")
        return self


def gesture_config_from_mapping(overrides: dict | None) -> GestureConfig:
    """Defaults merged with a config-file mapping; unknown keys rejected."""
    if not overrides:
        return GestureConfig()
    known = set(GestureConfig.__dataclass_fields__)
    unknown = set(overrides) - known
    if unknown:
        raise BadConfig(f"unknown gesture config key(s): {sorted(unknown)}")
    return GestureConfig(**{k: float(v) for k, v in overrides.items()}).validated()


@dataclass(frozen=True)
class GestureEvent:
    kind: str  # pinch_start/pinch_end/grab_start/grab_end/swipe/stillness_start/stillness_end
    tick: int
    direction: tuple[float, float, float] | None = None  # swipe only
    speed: float | None = None  # swipe only

    def to_record(self) -> dict:
        rec: dict = {"kind": self.kind, "tick": self.tick}
        if self.direction is not None:
            rec["direction"] = list(self.direction)
        if self.speed is not None:
            rec["speed"] = self.speed
        return rec


@dataclass(frozen=True)
class DetectorState:
    pinch_active: bool = False
    grab_active: bool = False
    still_active: bool = False
    swipe_t0: float | None = None
    swipe_sum_vx: float = 0.0
    swipe_sum_vy: float = 0.0
    swipe_sum_vz: float = 0.0
    swipe_sum_speed: float = 0.0
    swipe_samples: int = 0
    swipe_fired: bool = False
    still_t0: float | None = None
    tick: int = 0
    prev_palm: tuple[float, float, float] | None = None
    prev_t: float | None = None

    def to_record(self) -> dict:
        return {
            "pinch_active": self.pinch_active,
            "grab_active": self.grab_active,
            "still_active": self.still_active,
            "swipe_t0": self.swipe_t0,
            "swipe_sum": [self.swipe_sum_vx, self.swipe_sum_vy, self.swipe_sum_vz],
            "swipe_sum_speed": self.swipe_sum_speed,
            "swipe_samples": self.swipe_samples,
            "swipe_fired": self.swipe_fired,
            "still_t0": self.still_t0,
            "tick": self.tick,
        }


def advance(
    state: DetectorState,
    config: GestureConfig,
    t: float,
    tick: int,
    pinch: float,
    grab: float,
    velocity,
) -> tuple[list[GestureEvent], DetectorState]:
    """Process one sample; returns (events, new state).

    ``velocity`` is the palm velocity estimate for this sample (m/s).
    """
    events: list[GestureEvent] = []
    vx, vy, vz = float(velocity[0]), float(velocity[1]), float(velocity[2])
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)

    pinch_active = state.pinch_active
    if not pinch_active and pinch >= config.pinch_start:
        pinch_active = True
        events.append(GestureEvent("pinch_start", tick))
    elif pinch_active and pinch <= config.pinch_end:
        pinch_active = False
        events.append(GestureEvent("pinch_end", tick))

    grab_active = state.grab_active
    if not grab_active and grab >= config.grab_start:
        grab_active = True
        events.append(GestureEvent("grab_start", tick))
    elif grab_active and grab <= config.grab_end:
        grab_active = False
        events.append(GestureEvent("grab_end", tick))

    swipe_t0 = state.swipe_t0
    sum_vx, sum_vy, sum_vz = state.swipe_sum_vx, state.swipe_sum_vy, state.swipe_sum_vz
    sum_speed, samples, fired = state.swipe_sum_speed, state.swipe_samples, state.swipe_fired
    if speed >= config.swipe_speed_min:
        if swipe_t0 is None:
            swipe_t0 = t
            sum_vx = sum_vy = sum_vz = sum_speed = 0.0
            samples = 0
            fired = False
        sum_vx += vx
        sum_vy += vy
        sum_vz += vz
        sum_speed += speed
        samples += 1
        if not fired and t - swipe_t0 >= config.swipe_min_duration_s:
            mean = np.array([sum_vx, sum_vy, sum_vz]) / samples
            norm = float(np.linalg.norm(mean))
            direction = tuple(mean / norm) if norm > 0 else (0.0, 0.0, 0.0)
            events.append(
                GestureEvent("swipe", tick, direction=direction, speed=sum_speed / samples)
            )
            fired = True
    else:
        swipe_t0 = None
        fired = False

    still_t0 = state.still_t0
    still_active = state.still_active
    if speed <= config.still_eps:
        if still_t0 is None:
            still_t0 = t
        if not still_active and t - still_t0 >= config.still_min_duration_s:
            still_active = True
            events.append(GestureEvent("stillness_start", tick))
    else:
        still_t0 = None
        if still_active:
            still_active = False
            events.append(GestureEvent("stillness_end", tick))

    new_state = replace(
        state,
        pinch_active=pinch_active,
        grab_active=grab_active,
        still_active=still_active,
        swipe_t0=swipe_t0,
        swipe_sum_vx=sum_vx,
        swipe_sum_vy=sum_vy,
        swipe_sum_vz=sum_vz,
        swipe_sum_speed=sum_speed,
        swipe_samples=samples,
        swipe_fired=fired,
        still_t0=still_t0,
        tick=tick + 1,
    )
    return events, new_state


def detect_gestures(
    window, state: DetectorState, config: GestureConfig
) -> tuple[list[GestureEvent], DetectorState]:
    """Frame-based entry point: consume the newest frame of ``window``.

    Palm velocity is estimated against the previously consumed frame
    (zero for the first). The engine calls this once per tick.
    """
    frames: list[HandPoseFrame] = list(window)
    if not frames:
        return [], state
    f = frames[-1]
    p = (float(f.palm_position[0]), float(f.palm_position[1]), float(f.palm_position[2]))
    if state.prev_palm is None or state.prev_t is None or f.timestamp_s <= state.prev_t:
        v = (0.0, 0.0, 0.0)
    else:
        dt = f.timestamp_s - state.prev_t
        v = tuple((a - b) / dt for a, b in zip(p, state.prev_palm))
    events, new_state = advance(
        state, config, f.timestamp_s, state.tick, f.pinch_strength, f.grab_strength, v
    )
    return events, replace(new_state, prev_palm=p, prev_t=f.timestamp_s)
