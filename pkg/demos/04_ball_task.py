"""The ball task: the same swipe, four different limbs.

A paw pushes (it has no opposable thumb, so the attempted grab does
nothing); a hook grabs and carries; a fast butterfly passes straight
through; a slow butterfly nudges.
"""

import numpy as np

from limbswap.engine import SessionConfig, run_replay
from limbswap.synth import synth_trace


def play(prosthesis, trace, label):
    res = run_replay(trace, SessionConfig(prosthesis_id=prosthesis, task_id="ball"))
    events = {}
    for f in res.frames:
        for e in f.events:
            events[e["kind"]] = events.get(e["kind"], 0) + 1
    ball = res.final_state.ball
    print(f"{label:24s} ball -> {np.round(ball.ball_position, 3)}")
    print(f"{'':24s} events {events}")
    if res.metrics.time_to_goal_s is not None:
        print(
            f"{'':24s} goal in {res.metrics.time_to_goal_s:.2f} s, "
            f"path efficiency {res.metrics.path_efficiency:.2f}"
        )


swipe = synth_trace("reach_and_swipe")
play("paw", swipe, "paw (push only)")
play("hook", swipe, "hook (grab-attach)")
play("butterfly", synth_trace("reach_and_swipe", speed=0.5), "butterfly, too fast")
play("butterfly", synth_trace("reach_and_swipe", speed=0.2, swipe_len=0.3), "butterfly, delicate")
