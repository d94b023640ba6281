// limbswap wire protocol, version 1. One JSON object per message with a
// "type" token and the payload flattened beside it; transports frame the
// bytes as lines (TCP) or WebSocket text frames.

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // (w, x, y, z)

export interface FingerRecord {
  flex: number;
  tip: Vec3;
}

export interface PoseRecord {
  timestamp_s: number;
  palm_pos: Vec3;
  palm_quat: Quat;
  wrist_pos: Vec3;
  fingers: FingerRecord[];
  pinch_strength: number;
  grab_strength: number;
  confidence: number;
}

export interface ObjectRecord {
  translation: Vec3;
  rotation: Quat;
  scale: number;
  joint_angles: number[];
  anchors: { name: string; position: Vec3; direction: Vec3; role: string }[];
}

export interface FrameRecord {
  tick: number;
  object: ObjectRecord;
  hand_visible: boolean;
  task_view: Record<string, unknown>;
  events: { kind: string; tick: number; [key: string]: unknown }[];
  metrics: MetricsRecord | null;
}

export interface MetricsRecord {
  time_to_goal_s: number | null;
  path_efficiency: number | null;
  stroke_rms_deviation_m: number | null;
  ink_coverage: number | null;
}

// Geometry mirror of the prosthesis spec document, for drawing.
export type PrimitiveRecord =
  | { shape: "sphere"; center: Vec3; radius: number; joint?: string }
  | { shape: "capsule"; p0: Vec3; p1: Vec3; radius: number; joint?: string }
  | { shape: "box"; center: Vec3; half_extents: Vec3; orientation: Quat; joint?: string };

export interface SpecDocument {
  spec_version: number;
  id: string;
  display_name: string;
  geometry: PrimitiveRecord[];
  attachment: { translation: Vec3; rotation: Quat; scale: number };
  anchors: { name: string; local_position: Vec3; local_direction: Vec3; role: string; joint?: string }[];
  affordances: { gesture: string; action: { kind: string; [key: string]: unknown } }[];
  articulation: {
    name: string;
    axis: Vec3;
    pivot: Vec3;
    angle_lo: number;
    angle_hi: number;
    channel: { source: string; finger?: number };
  }[];
  motion_smoothing_alpha: number;
  mesh_ref?: string;
}

export interface CatalogEntry {
  id: string;
  display_name: string;
  static: boolean;
  joints: number;
  anchor_roles: string[];
  affordances: { gesture: string; action: string }[];
  spec: SpecDocument;
}

export type ServerMsg =
  | { type: "hello_ack"; version: number; catalog: CatalogEntry[] }
  | ({ type: "frame" } & FrameRecord)
  | ({ type: "metrics" } & MetricsRecord)
  | { type: "event"; kind: string; tick: number; [key: string]: unknown }
  | { type: "error"; code: string; message: string }
  | { type: "catalog"; catalog: CatalogEntry[] };

export type ClientMsg =
  | { type: "hello"; version: number; client_name: string }
  | ({ type: "pose" } & PoseRecord)
  | { type: "select_prosthesis"; id: string }
  | { type: "select_task"; id: string; config: Record<string, unknown> }
  | { type: "reset" }
  | { type: "list_prostheses" };

export function encode(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

export function decodeServer(text: string): ServerMsg | null {
  let rec: unknown;
  try {
    rec = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof rec !== "object" || rec === null || typeof (rec as { type?: unknown }).type !== "string") {
    return null;
  }
  return rec as ServerMsg;
}

export function poseMessage(pose: PoseRecord): string {
  // Key order fixed by construction: pose streams must be byte-deterministic.
  return JSON.stringify({ type: "pose", ...pose });
}
