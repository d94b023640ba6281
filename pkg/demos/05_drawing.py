"""Line drawing: pen contact vs airbrush trigger.

The pen draws while its tip touches the canvas; the airbrush draws while
the pinch trigger is held, from any distance, with the spot widening as
the nozzle backs away. Writes drawing.png when matplotlib is available.
"""

from limbswap.engine import SessionConfig, run_replay
from limbswap.synth import synth_trace

POLY = ((-0.12, -0.04), (0.08, -0.04), (0.08, 0.06))

pen_trace = synth_trace("pen_stroke", polyline=POLY)
pen = run_replay(
    pen_trace,
    SessionConfig(
        prosthesis_id="pen",
        task_id="draw",
        task_config={"target_polyline": [list(p) for p in POLY]},
    ),
)
print(
    f"pen: {pen.final_state.draw.ink_count} ink points, "
    f"coverage {pen.metrics.ink_coverage:.2f}, "
    f"rms deviation {pen.metrics.stroke_rms_deviation_m * 1000:.3f} mm"
)

air_trace = synth_trace("airbrush_sweep", height_m=0.12, trigger_windows=((0.1, 0.45), (0.55, 0.9)))
air = run_replay(air_trace, SessionConfig(prosthesis_id="airbrush", task_id="draw"))
strokes = air.final_state.draw.strokes
print(f"airbrush: {len(strokes)} strokes from two trigger windows")
if strokes:
    widths = [p[2] for s in strokes for p in s]
    print(f"spot width {min(widths) * 1000:.1f}..{max(widths) * 1000:.1f} mm at 12 cm standoff")

# Hovering 10 mm away: the pen's contact rule fails, the airbrush's ray
# does not care.
hover = synth_trace("airbrush_sweep", height_m=0.010, trigger_windows=((0.05, 0.95),))
for prosthesis in ("pen", "airbrush"):
    res = run_replay(hover, SessionConfig(prosthesis_id=prosthesis, task_id="draw"))
    print(f"{prosthesis} at 10 mm standoff: {res.final_state.draw.ink_count} ink points")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for stroke in pen.final_state.draw.strokes:
        xs, ys = [p[0] for p in stroke], [p[1] for p in stroke]
        ax.plot(xs, ys, color="black", linewidth=1.5, label="pen")
    for stroke in air.final_state.draw.strokes:
        for x, y, w in stroke[::3]:
            ax.add_patch(plt.Circle((x, y), w / 2, color="tab:blue", alpha=0.25))
    ax.set_aspect("equal")
    ax.set_title("pen stroke (line) and airbrush passes (spots)")
    fig.savefig("drawing.png", dpi=120)
    print("wrote drawing.png")
except ImportError:
    print("matplotlib not installed; skipping the PNG")
