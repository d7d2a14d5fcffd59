/** Wire protocol shared with the teleoperation service.
 *
 * One JSON object per WebSocket text frame (or per line on the TCP port).
 * Field names and layout mirror the service's schema exactly; the steer
 * loop must only ever emit frames that the service parses.
 */

export const FRAME_FIELDS = [
  "t",
  "sx", "sy", "sz",
  "ex", "ey", "ez",
  "wx", "wy", "wz",
  "quw", "qux", "quy", "quz",
  "qfw", "qfx", "qfy", "qfz",
  "qhw", "qhx", "qhy", "qhz",
] as const;

export type FrameField = (typeof FRAME_FIELDS)[number];
export type FrameRecord = Record<FrameField, number>;

export type Condition = "HH" | "HV" | "RH" | "none";
export const CONDITIONS: Condition[] = ["HH", "HV", "RH", "none"];

export interface FrameMsg {
  type: "frame";
  seq: number;
  data: FrameRecord;
}

export interface StartTaskMsg {
  type: "start_task";
  kind: "ring" | "posture";
  spec?: Record<string, unknown>;
}

export interface SetConditionMsg {
  type: "set_condition";
  value: Condition;
}

export type ClientMsg =
  | FrameMsg
  | StartTaskMsg
  | SetConditionMsg
  | { type: "reset" }
  | { type: "subscribe"; topics: string[] };

export interface JointStateMsg {
  type: "joint_state";
  t: number;
  theta: number[];
  flags: string[];
}

export interface PosesMsg {
  type: "poses";
  t: number;
  elbow: number[];
  wrist: number[];
  ee: number[];
}

export interface TaskEventMsg {
  type: "task_event";
  t: number;
  event: string;
  goal: number;
  payload?: Record<string, unknown>;
}

export interface TaskSnapshot {
  kind: string;
  status: string;
  active: number | null;
  goals: number[];
  shown_at: (number | null)[];
  achieved_at: (number | null)[];
}

export interface TaskStateMsg {
  type: "task_state";
  t: number;
  condition: Condition;
  task: TaskSnapshot | null;
}

export type ServerMsg =
  | JointStateMsg
  | PosesMsg
  | TaskEventMsg
  | TaskStateMsg
  | { type: "ack"; seq: number }
  | { type: "error"; code: string; detail: string };

/** Validate a frame record before it goes on the wire. */
export function frameInvariantsOk(rec: FrameRecord): boolean {
  for (const field of FRAME_FIELDS) {
    const v = rec[field];
    if (typeof v !== "number" || !Number.isFinite(v)) return false;
  }
  if (rec.t < 0) return false;
  for (const prefix of ["qu", "qf", "qh"] as const) {
    const n = Math.hypot(
      rec[`${prefix}w` as FrameField],
      rec[`${prefix}x` as FrameField],
      rec[`${prefix}y` as FrameField],
      rec[`${prefix}z` as FrameField],
    );
    if (Math.abs(n - 1) > 1e-6) return false;
  }
  const upper = Math.hypot(rec.ex - rec.sx, rec.ey - rec.sy, rec.ez - rec.sz);
  const fore = Math.hypot(rec.wx - rec.ex, rec.wy - rec.ey, rec.wz - rec.ez);
  return upper > 1e-9 && fore > 1e-9;
}

export function frameMsg(seq: number, data: FrameRecord): FrameMsg {
  return { type: "frame", seq, data };
}

export function encode(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

export function decode(text: string): ServerMsg | null {
  try {
    const obj = JSON.parse(text);
    if (obj && typeof obj.type === "string") return obj as ServerMsg;
  } catch {
    /* fall through */
  }
  return null;
}
