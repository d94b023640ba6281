"""Pose traces: generate, resample, measure, save.

Every demo in this directory is a small narrative script; run them from
the repository root with ``python demos/01_pose_traces.py``.
"""

import io

import numpy as np

from limbswap.pose import load_trace, palm_velocity, resample_trace, save_trace
from limbswap.synth import phase_windows, synth_trace

# A synthetic reach-and-swipe stands in for a live hand tracker. Same
# parameters, same bytes -- the whole engine is replayable.
trace = synth_trace("reach_and_swipe", speed=1.5)
print(f"generated {len(trace)} frames spanning {trace.frames[-1].timestamp_s:.2f} s")

windows = phase_windows("reach_and_swipe", speed=1.5)
for name, (t0, t1) in windows.items():
    print(f"  phase {name:6s} {t0:6.2f} .. {t1:6.2f} s")

# Palm speed peaks at exactly the configured swipe speed.
speeds = [float(np.linalg.norm(palm_velocity(trace, i))) for i in range(1, len(trace) - 1)]
print(f"max palm speed {max(speeds):.4f} m/s (configured 1.5)")

# Resampling onto the fixed engine tick is idempotent at the native rate.
again = resample_trace(trace, 120.0)
print(f"resampled at 120 Hz: {len(again)} frames (identical)")

# Traces round-trip through newline-delimited records.
buf = io.StringIO()
save_trace(trace, buf)
buf.seek(0)
back = load_trace(buf, source_label="memory")
print(f"saved and loaded: {len(back)} frames, label {back.source_label!r}")
