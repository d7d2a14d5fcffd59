/** Virtual human right arm steered by pointer controls.
 *
 * Forward model mirroring the service's conventions: the upper arm aims at
 * (cos e cos a, sin e, cos e sin a) for elevation e and azimuth a, the
 * elbow folds about the twisted upper arm's local z axis, and each segment
 * orientation is a shortest-arc aim composed with an axial twist. Frames
 * built here retarget on the service side to exactly these parameters.
 */

import { FrameRecord } from "./protocol.js";

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export const QUAT_IDENTITY: Quat = [1, 0, 0, 0];

export function qmul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function qrotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const [vx, vy, vz] = v;
  const tx = 2 * (y * vz - z * vy);
  const ty = 2 * (z * vx - x * vz);
  const tz = 2 * (x * vy - y * vx);
  return [
    vx + w * tx + y * tz - z * ty,
    vy + w * ty + z * tx - x * tz,
    vz + w * tz + x * ty - y * tx,
  ];
}

export function axisAngle(axis: Vec3, angle: number): Quat {
  const n = Math.hypot(axis[0], axis[1], axis[2]);
  const s = Math.sin(angle / 2) / n;
  return [Math.cos(angle / 2), axis[0] * s, axis[1] * s, axis[2] * s];
}

/** Minimal rotation taking unit vector a onto unit vector b. */
export function shortestArc(a: Vec3, b: Vec3): Quat {
  const w = 1 + a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  if (w <= 1e-12) {
    // antiparallel: any perpendicular axis
    const axis: Vec3 = Math.abs(a[0]) > Math.abs(a[1]) ? [0, 1, 0] : [1, 0, 0];
    const c = cross(a, axis);
    const n = Math.hypot(c[0], c[1], c[2]);
    return [0, c[0] / n, c[1] / n, c[2] / n];
  }
  const c = cross(a, b);
  const n = Math.hypot(w, c[0], c[1], c[2]);
  return [w / n, c[0] / n, c[1] / n, c[2] / n];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export interface ArmParams {
  elevation: number;
  azimuth: number;
  upperTwist: number;
  elbow: number; // opening angle, pi = straight
  foreTwist: number;
  handFlexion: number;
  handRoll: number;
}

export const NEUTRAL_PARAMS: ArmParams = {
  elevation: 0,
  azimuth: Math.PI / 2, // facing the ring plane
  upperTwist: 0,
  elbow: Math.PI - 0.4,
  foreTwist: 0,
  handFlexion: 0,
  handRoll: 0,
};

// steering stays inside the retargeting's well-defined interior
export const PARAM_RANGES: Record<keyof ArmParams, [number, number]> = {
  elevation: [-Math.PI / 2 + 0.12, Math.PI / 2 - 0.12],
  azimuth: [-Math.PI + 0.12, Math.PI - 0.12],
  upperTwist: [-Math.PI + 0.12, Math.PI - 0.12],
  elbow: [0.12, Math.PI - 0.12],
  foreTwist: [-Math.PI + 0.12, Math.PI - 0.12],
  handFlexion: [-Math.PI + 0.12, Math.PI - 0.12],
  handRoll: [-Math.PI + 0.12, Math.PI - 0.12],
};

export function clampParams(p: ArmParams): ArmParams {
  const out = { ...p };
  for (const key of Object.keys(PARAM_RANGES) as (keyof ArmParams)[]) {
    const [lo, hi] = PARAM_RANGES[key];
    out[key] = Math.min(hi, Math.max(lo, out[key]));
  }
  return out;
}

export interface ArmModel {
  shoulder: Vec3;
  upperLength: number;
  foreLength: number;
  handLength: number;
}

export const DEFAULT_MODEL: ArmModel = {
  shoulder: [0, 1.4, 0],
  upperLength: 0.3,
  foreLength: 0.27,
  handLength: 0.08,
};

export interface ArmPose {
  shoulder: Vec3;
  elbow: Vec3;
  wrist: Vec3;
  hand: Vec3; // fingertip, rendering only
  qUpper: Quat;
  qFore: Quat;
  qHand: Quat;
}

const X_AXIS: Vec3 = [1, 0, 0];
const Z_AXIS: Vec3 = [0, 0, 1];

export function armPose(params: ArmParams, model: ArmModel = DEFAULT_MODEL): ArmPose {
  const { elevation: e, azimuth: a } = params;
  const uDir: Vec3 = [
    Math.cos(e) * Math.cos(a),
    Math.sin(e),
    Math.cos(e) * Math.sin(a),
  ];
  const qUpper = qmul(shortestArc(X_AXIS, uDir), axisAngle(X_AXIS, params.upperTwist));
  const fold = Math.PI - params.elbow;
  const fLocal: Vec3 = [Math.cos(fold), Math.sin(fold), 0];
  const fDir = qrotate(qUpper, fLocal);
  const qFore = qmul(shortestArc(X_AXIS, fDir), axisAngle(X_AXIS, params.foreTwist));
  const qHand = qmul(
    qFore,
    qmul(axisAngle(Z_AXIS, params.handFlexion), axisAngle(X_AXIS, params.handRoll)),
  );

  const shoulder = model.shoulder;
  const elbow = add(shoulder, scale(uDir, model.upperLength));
  const wrist = add(elbow, scale(fDir, model.foreLength));
  const hand = add(wrist, scale(qrotate(qHand, X_AXIS), model.handLength));
  return { shoulder, elbow, wrist, hand, qUpper, qFore, qHand };
}

function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

function scale(v: Vec3, s: number): Vec3 {
  return [v[0] * s, v[1] * s, v[2] * s];
}

/** Flatten an arm pose into the wire frame record. */
export function armFrame(params: ArmParams, t: number, model: ArmModel = DEFAULT_MODEL): FrameRecord {
  const pose = armPose(params, model);
  return {
    t,
    sx: pose.shoulder[0], sy: pose.shoulder[1], sz: pose.shoulder[2],
    ex: pose.elbow[0], ey: pose.elbow[1], ez: pose.elbow[2],
    wx: pose.wrist[0], wy: pose.wrist[1], wz: pose.wrist[2],
    quw: pose.qUpper[0], qux: pose.qUpper[1], quy: pose.qUpper[2], quz: pose.qUpper[3],
    qfw: pose.qFore[0], qfx: pose.qFore[1], qfy: pose.qFore[2], qfz: pose.qFore[3],
    qhw: pose.qHand[0], qhx: pose.qHand[1], qhy: pose.qHand[2], qhz: pose.qHand[3],
  };
}
