/** Scene graph for the cockpit canvas.
 *
 * Pure data in, drawable primitives out: the robot chain rendered from
 * service-broadcast poses (never from locally computed joint angles), the
 * task goals, and the reference-arm overlay for the visualization
 * conditions. A small perspective camera projects world points (y up,
 * z toward the viewer-facing workspace) onto the canvas.
 */

import { ArmPose } from "./arm.js";
import { Condition, PosesMsg, TaskEventMsg, TaskSnapshot } from "./protocol.js";

export type Vec3 = [number, number, number];

/** Reference-arm anchor offsets relative to the robot base, per condition. */
export const CONDITION_OFFSETS: Record<Exclude<Condition, "none">, Vec3> = {
  HH: [-0.8, 0.33, 0.4],
  HV: [-0.5, 0.33, 0.4],
  RH: [-1.0, 0.33, 0.4],
};

/** Ring-task display geometry (mirrors the service defaults). */
export const RING_DISPLAY = {
  center: [0, 0.56, 0.9] as Vec3,
  radius: 0.225,
  targetDiameter: 0.05,
  count: 11,
};

export function ringTargetPositions(
  spec: { center: Vec3; radius: number; count: number } = RING_DISPLAY,
): Vec3[] {
  const out: Vec3[] = [];
  for (let i = 0; i < spec.count; i++) {
    const alpha = Math.PI / 2 + (2 * Math.PI * i) / spec.count;
    out.push([
      spec.center[0] + spec.radius * Math.cos(alpha),
      spec.center[1] + spec.radius * Math.sin(alpha),
      spec.center[2],
    ]);
  }
  return out;
}

export interface SceneConfig {
  robotBase: Vec3;
  condition: Condition;
  /** draw the reference arm on the robot itself (anchored at the base) */
  overlayOnRobot: boolean;
}

export const DEFAULT_SCENE: SceneConfig = {
  robotBase: [0, 0, 0],
  condition: "none",
  overlayOnRobot: false,
};

export interface LineSeg {
  kind: "line";
  a: Vec3;
  b: Vec3;
  color: string;
  width: number;
}

export interface Ball {
  kind: "ball";
  at: Vec3;
  radius: number; // metres
  color: string;
  filled: boolean;
}

export type Primitive = LineSeg | Ball;

export interface PostureGoalMarkers {
  elbow: Vec3;
  wrist: Vec3;
}

export interface SceneState {
  poses: PosesMsg | null;
  task: TaskSnapshot | null;
  postureGoal: PostureGoalMarkers | null; // from the latest goal_shown payload
  operatorArm: ArmPose | null;
}

const ROBOT_COLOR = "#8f98a8";
const REFERENCE_COLOR = "#e0b46c";

/** Anchor translation of the reference arm for the active condition. */
export function referenceAnchor(config: SceneConfig): Vec3 | null {
  if (config.condition === "none") return null;
  if (config.overlayOnRobot) return [...config.robotBase] as Vec3;
  const off = CONDITION_OFFSETS[config.condition];
  return [
    config.robotBase[0] + off[0],
    config.robotBase[1] + off[1],
    config.robotBase[2] + off[2],
  ];
}

/** Vertical conditions re-orient the arm to match the robot (x -> y). */
function conditionTransform(condition: Condition, overlay: boolean) {
  const vertical = condition === "HV" || overlay;
  return (p: Vec3, origin: Vec3, anchor: Vec3): Vec3 => {
    const d: Vec3 = [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]];
    const r: Vec3 = vertical ? [-d[1], d[0], d[2]] : d; // quarter turn about z
    return [anchor[0] + r[0], anchor[1] + r[1], anchor[2] + r[2]];
  };
}

export function buildScene(state: SceneState, config: SceneConfig): Primitive[] {
  const prims: Primitive[] = [];
  const base = config.robotBase;

  // ground reference
  prims.push({ kind: "line", a: [base[0] - 0.6, 0, base[2]], b: [base[0] + 0.6, 0, base[2]], color: "#333a46", width: 1 });

  // robot chain from broadcast poses only
  if (state.poses) {
    const elbow = state.poses.elbow as Vec3;
    const wrist = state.poses.wrist as Vec3;
    const ee = state.poses.ee as Vec3;
    const links: [Vec3, Vec3][] = [
      [base, elbow],
      [elbow, wrist],
      [wrist, ee],
    ];
    for (const [a, b] of links) {
      prims.push({ kind: "line", a, b, color: ROBOT_COLOR, width: 6 });
    }
    prims.push({ kind: "ball", at: elbow, radius: 0.035, color: "#3b7dd8", filled: true });
    prims.push({ kind: "ball", at: wrist, radius: 0.035, color: "#d84b3b", filled: true });
    prims.push({ kind: "ball", at: ee, radius: 0.02, color: "#e8e8e8", filled: true });
  }

  // task goals
  if (state.task?.kind === "ring") {
    const targets = ringTargetPositions();
    const achievedByGoal = new Map<number, boolean>();
    state.task.goals.forEach((goal, i) => {
      achievedByGoal.set(goal, state.task!.achieved_at[i] != null);
    });
    const activeGoal =
      state.task.status === "running" && state.task.active != null
        ? state.task.goals[state.task.active]
        : null;
    targets.forEach((p, i) => {
      const color = achievedByGoal.get(i)
        ? "#45c96b" // achieved targets turn green
        : i === activeGoal
          ? "#e0433b" // active target is red
          : "#5a6374";
      prims.push({
        kind: "ball", at: p, radius: RING_DISPLAY.targetDiameter / 2, color,
        filled: i === activeGoal || !!achievedByGoal.get(i),
      });
    });
  }
  if (state.task?.kind === "posture" && state.postureGoal) {
    prims.push({ kind: "ball", at: state.postureGoal.elbow, radius: 0.05, color: "#9fc2ee", filled: false });
    prims.push({ kind: "ball", at: state.postureGoal.wrist, radius: 0.05, color: "#eeb3a9", filled: false });
  }

  // reference arm overlay per condition
  const anchor = referenceAnchor(config);
  if (anchor && state.operatorArm) {
    const arm = state.operatorArm;
    const move = conditionTransform(config.condition, config.overlayOnRobot);
    const origin = arm.shoulder;
    if (config.condition === "RH" && state.poses) {
      // robot replica: mirror the live robot chain, laid horizontally
      const robotPts: Vec3[] = [base, state.poses.elbow as Vec3, state.poses.wrist as Vec3, state.poses.ee as Vec3];
      const lay = (p: Vec3): Vec3 => {
        const d: Vec3 = [p[0] - base[0], p[1] - base[1], p[2] - base[2]];
        return [anchor[0] + d[1], anchor[1] + d[0], anchor[2] + d[2]]; // vertical -> horizontal
      };
      for (let i = 0; i + 1 < robotPts.length; i++) {
        prims.push({ kind: "line", a: lay(robotPts[i]), b: lay(robotPts[i + 1]), color: REFERENCE_COLOR, width: 5 });
      }
    } else {
      const pts = [arm.shoulder, arm.elbow, arm.wrist, arm.hand].map((p) =>
        move(p, origin, anchor),
      );
      for (let i = 0; i + 1 < pts.length; i++) {
        prims.push({ kind: "line", a: pts[i], b: pts[i + 1], color: REFERENCE_COLOR, width: 5 });
      }
      prims.push({ kind: "ball", at: pts[1], radius: 0.025, color: REFERENCE_COLOR, filled: true });
      prims.push({ kind: "ball", at: pts[2], radius: 0.025, color: REFERENCE_COLOR, filled: true });
    }
  }

  return prims;
}

/** Tiny look-at perspective camera for the canvas. */
export class Camera {
  constructor(
    public eye: Vec3 = [1.9, 1.5, 2.6],
    public look: Vec3 = [0, 0.7, 0.5],
    public fov = 1.0,
  ) {}

  project(p: Vec3, width: number, height: number): [number, number, number] {
    const f: Vec3 = norm(sub(this.look, this.eye));
    const up: Vec3 = [0, 1, 0];
    const r = norm(cross(f, up));
    const u = cross(r, f);
    const d = sub(p, this.eye);
    const x = dot(d, r);
    const y = dot(d, u);
    const z = dot(d, f);
    const safe = Math.max(z, 0.1);
    const s = (0.5 * width) / Math.tan(this.fov / 2);
    return [width / 2 + (s * x) / safe, height / 2 - (s * y) / safe, z];
  }

  /** metres-to-pixels scale at a given depth (for ball radii). */
  pixelScale(depth: number, width: number): number {
    const s = (0.5 * width) / Math.tan(this.fov / 2);
    return s / Math.max(depth, 0.1);
  }
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}
function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}
function norm(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}

/** Fold task events into the display state (target recoloring, markers). */
export function applyTaskEvent(state: SceneState, msg: TaskEventMsg): void {
  if (msg.event === "goal_shown" && msg.payload) {
    const p = msg.payload as Record<string, unknown>;
    if (Array.isArray(p.elbow) && Array.isArray(p.wrist)) {
      state.postureGoal = {
        elbow: p.elbow as Vec3,
        wrist: p.wrist as Vec3,
      };
    }
  }
}
