"""Determinism: replay twice, hash everything, compare bytes.

The engine is a fixed-tick loop with no randomness: the same trace and
config always produce the same state hashes and the same frame log.
"""

import io

from limbswap.engine import SessionConfig, frames_digest, record_frames, run_replay, state_hash
from limbswap.synth import synth_trace

trace = synth_trace("reach_and_swipe")
config = SessionConfig(prosthesis_id="paw", task_id="ball")

a = run_replay(trace, config, collect_hashes=True)
b = run_replay(trace, config, collect_hashes=True)

print(f"run A: {len(a.frames)} frames, final state hash {state_hash(a.final_state)}")
print(f"run B: {len(b.frames)} frames, final state hash {state_hash(b.final_state)}")
print("hash sequences identical:", a.hashes == b.hashes)

buf_a, buf_b = io.StringIO(), io.StringIO()
record_frames(a.frames, buf_a)
record_frames(b.frames, buf_b)
print("frame logs byte-identical:", buf_a.getvalue() == buf_b.getvalue())
print("frame digest:", frames_digest(a.frames))

# A different prosthesis diverges immediately.
c = run_replay(trace, SessionConfig(prosthesis_id="whisk", task_id="ball"))
print("whisk final hash differs:", state_hash(c.final_state) != state_hash(a.final_state))
