"""Gesture discretization: hysteresis keeps noisy signals quiet.

A pinch starts at 0.8 and ends at 0.6; anything oscillating between the
two thresholds produces no events at all.
"""

import numpy as np

from limbswap.gestures import DetectorState, GestureConfig, advance

config = GestureConfig()
dt = 1.0 / 120.0


def feed(label, pinches, speeds=None):
    state = DetectorState()
    speeds = speeds or [0.1] * len(pinches)
    collected = []
    for k, (p, s) in enumerate(zip(pinches, speeds)):
        events, state = advance(state, config, k * dt, k, p, 0.0, (s, 0.0, 0.0))
        collected.extend(events)
    names = [e.kind for e in collected] or ["(silence)"]
    print(f"{label:28s} -> {', '.join(names)}")


feed("clean pinch and release", [0.2, 0.5, 0.85, 0.9, 0.5, 0.2])
feed("noise inside the dead band", list(np.random.default_rng(1).uniform(0.61, 0.79, 20)))
feed("dip that stays above end", [0.85, 0.7, 0.85, 0.7, 0.85])

# A sustained fast motion fires exactly one swipe with the mean velocity.
fast = [0.0] * 20
feed("sustained 1.5 m/s swipe", fast, speeds=[1.5] * 20)
feed("short 25 ms burst", fast[:8], speeds=[1.5] * 4 + [0.0] * 4)
