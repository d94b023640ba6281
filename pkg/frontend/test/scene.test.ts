import { describe, expect, it } from "vitest";

import type { FrameRecord, SpecDocument } from "../src/protocol.js";
import { RENDER_ITEM_KINDS, Scene } from "../src/scene.js";

const SPEC: SpecDocument = {
  spec_version: 1,
  id: "stick",
  display_name: "Stick",
  geometry: [
    { shape: "capsule", p0: [0, 0, 0], p1: [0, 0, 0.1], radius: 0.01 },
    { shape: "sphere", center: [0.05, 0, 0], radius: 0.02, joint: "bend" },
    { shape: "box", center: [0, 0, 0.12], half_extents: [0.02, 0.01, 0.01], orientation: [1, 0, 0, 0] },
  ],
  attachment: { translation: [0, 0, 0.02], rotation: [1, 0, 0, 0], scale: 1 },
  anchors: [{ name: "tip", local_position: [0, 0, 0.1], local_direction: [0, 0, 1], role: "tip" }],
  affordances: [],
  articulation: [
    {
      name: "bend",
      axis: [0, 0, 1],
      pivot: [0, 0, 0],
      angle_lo: 0,
      angle_hi: Math.PI / 2,
      channel: { source: "grab_strength" },
    },
  ],
  motion_smoothing_alpha: 0,
};

function ballFrame(tick: number, overrides: Partial<FrameRecord> = {}): FrameRecord {
  return {
    tick,
    object: {
      translation: [0, 0, 0.1],
      rotation: [1, 0, 0, 0],
      scale: 1,
      joint_angles: [0],
      anchors: [{ name: "tip", position: [0, 0, 0.2], direction: [0, 0, 1], role: "tip" }],
    },
    hand_visible: false,
    task_view: {
      ball_position: [0.1, 0, 0.15],
      ball_radius: 0.05,
      goal_center: [0.4, 0, 0.15],
      goal_radius: 0.15,
      done: false,
    },
    events: [],
    metrics: null,
    ...overrides,
  };
}

describe("scene", () => {
  it("never contains a hand glyph, only the allowed item vocabulary", () => {
    const scene = new Scene();
    scene.setSpec(SPEC);
    scene.ingest(ballFrame(0));
    const items = scene.renderList();
    expect(items.length).toBeGreaterThan(3);
    for (const item of items) {
      expect(RENDER_ITEM_KINDS.has(item.kind)).toBe(true);
      expect(JSON.stringify(item).toLowerCase()).not.toContain("hand");
    }
    const roles = new Set(items.map((i) => ("role" in i ? i.role : "hud")));
    expect(roles.has("ball")).toBe(true);
    expect(roles.has("goal")).toBe(true);
  });

  it("drops out-of-order ticks and counts them", () => {
    const scene = new Scene();
    scene.ingest(ballFrame(10));
    scene.ingest(ballFrame(8));
    scene.ingest(ballFrame(10));
    scene.ingest(ballFrame(12));
    expect(scene.framesDrawn).toBe(2);
    expect(scene.droppedFrames).toBe(2);
    expect(scene.frame!.tick).toBe(12);
  });

  it("skips malformed frames defensively and counts them", () => {
    const scene = new Scene();
    scene.ingest({} as FrameRecord);
    scene.ingest({ tick: 1 } as FrameRecord);
    scene.ingest(ballFrame(2));
    expect(scene.malformedFrames).toBe(2);
    expect(scene.framesDrawn).toBe(1);
  });

  it("appends draw-task stroke deltas", () => {
    const scene = new Scene();
    const drawFrame = ballFrame(0, {
      task_view: {
        stroke_count: 1,
        ink_count: 3,
        drawing: true,
        new_points: [
          { stroke: 0, point: [0.0, 0.0], width: 0.002 },
          { stroke: 0, point: [0.01, 0.0], width: 0.002 },
          { stroke: 0, point: [0.02, 0.0], width: 0.002 },
        ],
      },
    });
    scene.ingest(drawFrame);
    expect(scene.strokes).toHaveLength(1);
    expect(scene.strokes[0]).toHaveLength(3);
    const more = ballFrame(2, {
      task_view: { new_points: [{ stroke: 1, point: [0.05, 0.01], width: 0.004 }] },
    });
    scene.ingest(more);
    expect(scene.strokes).toHaveLength(2);
    const strokeItems = scene.renderList().filter((i) => "role" in i && i.role === "stroke");
    expect(strokeItems.length).toBe(2);
  });

  it("articulated joints move the bound geometry", () => {
    const scene = new Scene();
    scene.setSpec(SPEC);
    scene.ingest(ballFrame(0));
    const straight = scene
      .renderList()
      .filter((i) => i.kind === "circle" && i.role === "proxy");
    const bent = new Scene();
    bent.setSpec(SPEC);
    const frame = ballFrame(0);
    frame.object.joint_angles = [Math.PI / 2];
    bent.ingest(frame);
    const rotated = bent.renderList().filter((i) => i.kind === "circle" && i.role === "proxy");
    expect(straight[0]!.kind).toBe("circle");
    expect(rotated[0]!.kind).toBe("circle");
    const a = straight[0] as { x: number; y: number };
    const b = rotated[0] as { x: number; y: number };
    expect(Math.hypot(a.x - b.x, a.y - b.y)).toBeGreaterThan(10);
  });

  it("mirror toggle flips x only", () => {
    const scene = new Scene({ width: 800, height: 600, pixelsPerMeter: 600, mirror: false });
    const p = scene.project([0.1, 0.05, 0]);
    scene.view.mirror = true;
    const m = scene.project([0.1, 0.05, 0]);
    expect(m.y).toBe(p.y);
    expect(m.x - 400).toBeCloseTo(-(p.x - 400), 9);
  });

  it("hud shows metrics and drop counters", () => {
    const scene = new Scene();
    scene.ingest(ballFrame(4, { metrics: { time_to_goal_s: 1.5, path_efficiency: 0.7, stroke_rms_deviation_m: null, ink_coverage: null } }));
    scene.ingest(ballFrame(2));
    const hud = scene.renderList().find((i) => i.kind === "hud") as { lines: string[] };
    const text = hud.lines.join(" | ");
    expect(text).toContain("goal in 1.50 s");
    expect(text).toContain("dropped 1");
  });
});
