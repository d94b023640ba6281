"""Regenerate the shipped pose-trace data files.

The generators are bit-deterministic, so these files are reproducible:

    python demos/build_traces.py
"""

from __future__ import annotations

import os

from limbswap.pose import save_trace
from limbswap.synth import synth_trace

SCRIPTS = {
    "swipe": {"generator": "reach_and_swipe"},
    "pen_stroke": {"generator": "pen_stroke"},
    "airbrush_sweep": {"generator": "airbrush_sweep"},
    "hold_still": {"generator": "hold_still"},
}


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    out_dir = os.path.join(here, "..", "src", "limbswap", "data", "traces")
    os.makedirs(out_dir, exist_ok=True)
    for name, script in SCRIPTS.items():
        trace = synth_trace(script)
        path = os.path.join(out_dir, f"{name}.poses.jsonl")
        save_trace(trace, path)
        print(f"wrote {path}: {len(trace)} frames")


if __name__ == "__main__":
    main()
