// Scene model: render frames become a flat display list.
//
// The list never contains a hand glyph: the limb is replaced, not
// overlaid, and tests assert the item vocabulary stays that way.
// Malformed frames are skipped and counted; out-of-order ticks are
// dropped and counted.

import type { FrameRecord, MetricsRecord, PrimitiveRecord, SpecDocument, Vec3 } from "./protocol.js";
import { add, fromAxisAngle, rotate, scale, sub } from "./quat.js";

export interface ViewConfig {
  width: number;
  height: number;
  pixelsPerMeter: number;
  mirror: boolean; // presentation flip, default off
}

export const DEFAULT_VIEW: ViewConfig = { width: 800, height: 600, pixelsPerMeter: 600, mirror: false };

export type RenderItem =
  | { kind: "circle"; role: "proxy" | "ball" | "goal" | "anchor" | "ink"; x: number; y: number; r: number }
  | { kind: "segment"; role: "body" | "stroke"; x0: number; y0: number; x1: number; y1: number; w: number }
  | { kind: "hud"; lines: string[] };

export const RENDER_ITEM_KINDS = new Set(["circle", "segment", "hud"]);

interface StrokePoint {
  x: number;
  y: number;
  w: number;
}

export class Scene {
  view: ViewConfig;
  spec: SpecDocument | null = null;
  frame: FrameRecord | null = null;
  metrics: MetricsRecord | null = null;
  strokes: StrokePoint[][] = [];
  eventLog: string[] = [];
  framesDrawn = 0;
  droppedFrames = 0;
  malformedFrames = 0;
  private lastTick = -1;

  constructor(view: ViewConfig = DEFAULT_VIEW) {
    this.view = view;
  }

  setSpec(spec: SpecDocument | null): void {
    this.spec = spec;
    this.resetTask();
  }

  resetTask(): void {
    this.frame = null;
    this.metrics = null;
    this.strokes = [];
    this.eventLog = [];
    this.lastTick = -1;
  }

  ingest(frame: FrameRecord): void {
    if (
      typeof frame?.tick !== "number" ||
      !frame.object ||
      !Array.isArray(frame.object.translation) ||
      !Array.isArray(frame.events) ||
      typeof frame.task_view !== "object"
    ) {
      this.malformedFrames += 1;
      return;
    }
    if (frame.tick <= this.lastTick) {
      this.droppedFrames += 1;
      return;
    }
    this.lastTick = frame.tick;
    this.frame = frame;
    this.framesDrawn += 1;
    if (frame.metrics) this.metrics = frame.metrics;
    for (const ev of frame.events) {
      this.eventLog.push(`t${ev.tick} ${ev.kind}`);
    }
    if (this.eventLog.length > 8) this.eventLog = this.eventLog.slice(-8);
    const newPoints = (frame.task_view as { new_points?: { stroke: number; point: [number, number]; width: number }[] }).new_points;
    if (Array.isArray(newPoints)) {
      for (const p of newPoints) {
        while (this.strokes.length <= p.stroke) this.strokes.push([]);
        this.strokes[p.stroke]!.push({ x: p.point[0], y: p.point[1], w: p.width });
      }
    }
  }

  project(p: Vec3): { x: number; y: number } {
    const sx = this.view.mirror ? -1 : 1;
    return {
      x: this.view.width / 2 + sx * p[0] * this.view.pixelsPerMeter,
      y: this.view.height / 2 - p[1] * this.view.pixelsPerMeter,
    };
  }

  private placed(p: Vec3, jointName: string | undefined): Vec3 {
    const frame = this.frame!;
    let local = p;
    if (jointName && this.spec) {
      const idx = this.spec.articulation.findIndex((j) => j.name === jointName);
      const joint = this.spec.articulation[idx];
      const angle = frame.object.joint_angles[idx];
      if (joint && typeof angle === "number") {
        const q = fromAxisAngle(joint.axis, angle);
        local = add(joint.pivot, rotate(q, sub(p, joint.pivot)));
      }
    }
    const t = frame.object;
    return add(t.translation, scale(rotate(t.rotation, local), t.scale));
  }

  private primitiveItems(g: PrimitiveRecord, ppm: number): RenderItem[] {
    const frame = this.frame!;
    const s = frame.object.scale;
    if (g.shape === "sphere") {
      const c = this.project(this.placed(g.center, g.joint));
      return [{ kind: "circle", role: "proxy", x: c.x, y: c.y, r: g.radius * s * ppm }];
    }
    if (g.shape === "capsule") {
      const a = this.project(this.placed(g.p0, g.joint));
      const b = this.project(this.placed(g.p1, g.joint));
      return [
        { kind: "segment", role: "body", x0: a.x, y0: a.y, x1: b.x, y1: b.y, w: 2 * g.radius * s * ppm },
      ];
    }
    // Box: project the 12 edges as a wireframe.
    const he = g.half_extents;
    const corners: Vec3[] = [];
    for (const sx of [-1, 1]) {
      for (const sy of [-1, 1]) {
        for (const sz of [-1, 1]) {
          const local = rotate(g.orientation, [sx * he[0], sy * he[1], sz * he[2]]);
          corners.push(this.placed(add(g.center, local), g.joint));
        }
      }
    }
    const edges: [number, number][] = [
      [0, 1], [2, 3], [4, 5], [6, 7],
      [0, 2], [1, 3], [4, 6], [5, 7],
      [0, 4], [1, 5], [2, 6], [3, 7],
    ];
    return edges.map(([i, j]) => {
      const a = this.project(corners[i]!);
      const b = this.project(corners[j]!);
      return { kind: "segment", role: "body", x0: a.x, y0: a.y, x1: b.x, y1: b.y, w: 1 } as RenderItem;
    });
  }

  renderList(): RenderItem[] {
    const items: RenderItem[] = [];
    const ppm = this.view.pixelsPerMeter;
    const frame = this.frame;
    if (frame) {
      if (this.spec) {
        for (const g of this.spec.geometry) items.push(...this.primitiveItems(g, ppm));
      }
      for (const anchor of frame.object.anchors) {
        const c = this.project(anchor.position);
        items.push({ kind: "circle", role: "anchor", x: c.x, y: c.y, r: 3 });
      }
      const view = frame.task_view as {
        ball_position?: Vec3;
        ball_radius?: number;
        goal_center?: Vec3;
        goal_radius?: number;
      };
      if (Array.isArray(view.ball_position)) {
        const goal = this.project(view.goal_center ?? [0, 0, 0]);
        items.push({ kind: "circle", role: "goal", x: goal.x, y: goal.y, r: (view.goal_radius ?? 0.1) * ppm });
        const ball = this.project(view.ball_position);
        items.push({ kind: "circle", role: "ball", x: ball.x, y: ball.y, r: (view.ball_radius ?? 0.05) * ppm });
      }
    }
    for (const stroke of this.strokes) {
      for (let i = 1; i < stroke.length; i++) {
        const a = stroke[i - 1]!;
        const b = stroke[i]!;
        const pa = this.project([a.x, a.y, 0]);
        const pb = this.project([b.x, b.y, 0]);
        items.push({ kind: "segment", role: "stroke", x0: pa.x, y0: pa.y, x1: pb.x, y1: pb.y, w: b.w * ppm });
      }
      if (stroke.length === 1) {
        const only = stroke[0]!;
        const p = this.project([only.x, only.y, 0]);
        items.push({ kind: "circle", role: "ink", x: p.x, y: p.y, r: (only.w / 2) * ppm });
      }
    }
    const hud: string[] = [];
    if (frame) hud.push(`tick ${frame.tick}`);
    if (this.metrics?.time_to_goal_s != null) hud.push(`goal in ${this.metrics.time_to_goal_s.toFixed(2)} s`);
    if (this.metrics?.path_efficiency != null) hud.push(`efficiency ${this.metrics.path_efficiency.toFixed(2)}`);
    if (this.metrics?.ink_coverage != null) hud.push(`coverage ${this.metrics.ink_coverage.toFixed(2)}`);
    if (this.droppedFrames || this.malformedFrames) {
      hud.push(`dropped ${this.droppedFrames} malformed ${this.malformedFrames}`);
    }
    hud.push(...this.eventLog);
    items.push({ kind: "hud", lines: hud });
    return items;
  }
}

/** Draw a display list onto a canvas 2D context. */
export function drawItems(ctx: CanvasRenderingContext2D, items: RenderItem[], view: ViewConfig): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, view.width, view.height);
  const colors: Record<string, string> = {
    proxy: "#7a5cc7",
    body: "#7a5cc7",
    ball: "#d1495b",
    goal: "#9fd1a0",
    anchor: "#222222",
    ink: "#1b4965",
    stroke: "#1b4965",
  };
  for (const item of items) {
    if (item.kind === "circle") {
      ctx.beginPath();
      ctx.arc(item.x, item.y, Math.max(1.5, item.r), 0, 2 * Math.PI);
      if (item.role === "goal") {
        ctx.strokeStyle = colors[item.role] ?? "#000";
        ctx.lineWidth = 3;
        ctx.stroke();
      } else {
        ctx.fillStyle = colors[item.role] ?? "#000";
        ctx.globalAlpha = item.role === "proxy" ? 0.65 : 1.0;
        ctx.fill();
        ctx.globalAlpha = 1.0;
      }
    } else if (item.kind === "segment") {
      ctx.beginPath();
      ctx.moveTo(item.x0, item.y0);
      ctx.lineTo(item.x1, item.y1);
      ctx.strokeStyle = colors[item.role] ?? "#000";
      ctx.lineWidth = Math.max(1, item.w);
      ctx.lineCap = "round";
      ctx.globalAlpha = item.role === "body" ? 0.65 : 1.0;
      ctx.stroke();
      ctx.globalAlpha = 1.0;
    } else {
      ctx.fillStyle = "#333";
      ctx.font = "12px system-ui, sans-serif";
      item.lines.forEach((line, i) => ctx.fillText(line, 10, 18 + 14 * i));
    }
  }
}
