// Pointer-driven hand-pose emulation.
//
// The pointer moves the palm in the canvas plane, the wheel pulls it
// toward or away from the screen, holding the primary button ramps
// pinch_strength 0 -> 1 over 100 ms (and back on release), and holding
// the modifier (shift) does the same for grab_strength. Every emitted
// frame satisfies the engine's pose invariants, emission is capped at
// 60 Hz, and a scripted event sequence always yields the same bytes.

import type { PoseRecord, Quat, Vec3 } from "./protocol.js";
import { add, rotate, scale } from "./quat.js";

export interface Calibration {
  originPx: { x: number; y: number }; // viewport point mapped to origin
  metersPerPixel: number;
  palmOrigin: Vec3; // palm position when the pointer sits at originPx
  depthRange: [number, number]; // palm z clamp
  depthPerNotch: number; // meters per wheel notch (deltaY of 100)
}

export const DEFAULT_CALIBRATION: Calibration = {
  originPx: { x: 400, y: 300 },
  metersPerPixel: 1 / 600,
  palmOrigin: [0, 0, 0.21],
  depthRange: [0.05, 0.45],
  depthPerNotch: 0.01,
};

export type PointerEvent2 =
  | { kind: "move"; t: number; x: number; y: number }
  | { kind: "button"; t: number; pressed: boolean }
  | { kind: "modifier"; t: number; pressed: boolean }
  | { kind: "wheel"; t: number; deltaY: number };

const RAMP_S = 0.1;
const EMIT_INTERVAL_S = 1 / 60;
// Palm faces the screen; the tool axis points at the canvas (world -Z).
const HAND_QUAT: Quat = [0, 0, 1, 0];
const PALM_OFFSET: Vec3 = [0, 0, 0.09];
const FINGER_OFFSETS: Vec3[] = [
  [-0.045, 0, 0.035],
  [-0.02, 0, 0.075],
  [0, 0, 0.08],
  [0.02, 0, 0.075],
  [0.04, 0, 0.06],
];

interface Ramp {
  level: number; // value when the ramp last changed direction
  since: number; // time of that change
  rising: boolean;
}

function rampValue(r: Ramp, t: number): number {
  const delta = (t - r.since) / RAMP_S;
  const v = r.rising ? r.level + delta : r.level - delta;
  return Math.min(1, Math.max(0, v));
}

export class PointerEmulator {
  private cal: Calibration;
  private px: number;
  private py: number;
  private depth: number;
  private pinch: Ramp = { level: 0, since: -1e9, rising: false };
  private grab: Ramp = { level: 0, since: -1e9, rising: false };
  private lastEmitT: number | null = null;
  private lastPalm: Vec3 | null = null;
  velocity: Vec3 = [0, 0, 0]; // derived from emitted history, for display

  constructor(calibration: Calibration = DEFAULT_CALIBRATION) {
    this.cal = calibration;
    this.px = calibration.originPx.x;
    this.py = calibration.originPx.y;
    this.depth = calibration.palmOrigin[2];
  }

  handle(ev: PointerEvent2): void {
    if (ev.kind === "move") {
      this.px = ev.x;
      this.py = ev.y;
    } else if (ev.kind === "wheel") {
      const [lo, hi] = this.cal.depthRange;
      this.depth = Math.min(hi, Math.max(lo, this.depth - (ev.deltaY / 100) * this.cal.depthPerNotch));
    } else if (ev.kind === "button") {
      if (ev.pressed !== this.pinch.rising) {
        this.pinch = { level: rampValue(this.pinch, ev.t), since: ev.t, rising: ev.pressed };
      }
    } else if (ev.kind === "modifier") {
      if (ev.pressed !== this.grab.rising) {
        this.grab = { level: rampValue(this.grab, ev.t), since: ev.t, rising: ev.pressed };
      }
    }
  }

  palmAt(t: number): Vec3 {
    const c = this.cal;
    return [
      c.palmOrigin[0] + (this.px - c.originPx.x) * c.metersPerPixel,
      c.palmOrigin[1] - (this.py - c.originPx.y) * c.metersPerPixel,
      this.depth,
    ];
  }

  /** Emit a frame for time t, or null when inside the 60 Hz budget. */
  sample(t: number): PoseRecord | null {
    if (t < 0) return null;
    if (this.lastEmitT !== null && t - this.lastEmitT < EMIT_INTERVAL_S - 1e-9) return null;
    const palm = this.palmAt(t);
    if (this.lastEmitT !== null && this.lastPalm !== null && t > this.lastEmitT) {
      const dt = t - this.lastEmitT;
      this.velocity = [
        (palm[0] - this.lastPalm[0]) / dt,
        (palm[1] - this.lastPalm[1]) / dt,
        (palm[2] - this.lastPalm[2]) / dt,
      ];
    }
    this.lastEmitT = t;
    this.lastPalm = palm;

    const grab = rampValue(this.grab, t);
    const wrist = add(palm, scale(rotate(HAND_QUAT, PALM_OFFSET), -1));
    const fingers = FINGER_OFFSETS.map((base) => {
      const local: Vec3 = [base[0], base[1], base[2] * (1 - 0.6 * grab)];
      return { flex: grab, tip: add(palm, rotate(HAND_QUAT, local)) };
    });
    return {
      timestamp_s: t,
      palm_pos: palm,
      palm_quat: HAND_QUAT,
      wrist_pos: wrist,
      fingers,
      pinch_strength: rampValue(this.pinch, t),
      grab_strength: grab,
      confidence: 1,
    };
  }
}

/** Replay a scripted event sequence, sampling at a fixed rate: the
 *  deterministic pose stream used by tests and recordings. */
export function emulateScript(
  events: PointerEvent2[],
  durationS: number,
  calibration: Calibration = DEFAULT_CALIBRATION,
  rateHz = 60,
): PoseRecord[] {
  const emulator = new PointerEmulator(calibration);
  const sorted = [...events].sort((a, b) => a.t - b.t);
  const out: PoseRecord[] = [];
  let next = 0;
  const steps = Math.floor(durationS * rateHz);
  for (let k = 0; k <= steps; k++) {
    const t = k / rateHz;
    while (next < sorted.length && sorted[next]!.t <= t) {
      emulator.handle(sorted[next]!);
      next += 1;
    }
    const frame = emulator.sample(t);
    if (frame) out.push(frame);
  }
  return out;
}
