import { describe, expect, it } from "vitest";

import { NEUTRAL_PARAMS, armFrame, armPose } from "../src/arm.js";
import { Condition } from "../src/protocol.js";
import {
  CONDITION_OFFSETS,
  DEFAULT_SCENE,
  RING_DISPLAY,
  SceneState,
  buildScene,
  referenceAnchor,
  ringTargetPositions,
} from "../src/scene.js";

const baseState = (): SceneState => ({
  poses: {
    type: "poses",
    t: 0,
    elbow: [0, 0.9, 0.1],
    wrist: [0, 1.4, 0],
    ee: [0, 1.3, 0.12],
  },
  task: null,
  postureGoal: null,
  operatorArm: armPose(NEUTRAL_PARAMS),
});

describe("condition placement", () => {
  it("uses the exact side-by-side offsets relative to the robot base", () => {
    expect(CONDITION_OFFSETS.HH).toEqual([-0.8, 0.33, 0.4]);
    expect(CONDITION_OFFSETS.HV).toEqual([-0.5, 0.33, 0.4]);
    expect(CONDITION_OFFSETS.RH).toEqual([-1.0, 0.33, 0.4]);
  });

  it("anchors each condition at base + offset", () => {
    for (const condition of ["HH", "HV", "RH"] as const) {
      const anchor = referenceAnchor({
        robotBase: [0.1, 0.0, -0.2],
        condition,
        overlayOnRobot: false,
      });
      const off = CONDITION_OFFSETS[condition];
      expect(anchor).toEqual([0.1 + off[0], 0.0 + off[1], -0.2 + off[2]]);
    }
  });

  it("returns no anchor for the bare condition and the base for overlay mode", () => {
    expect(referenceAnchor({ ...DEFAULT_SCENE, condition: "none" })).toBeNull();
    expect(
      referenceAnchor({ robotBase: [0.3, 0, 0], condition: "HV", overlayOnRobot: true }),
    ).toEqual([0.3, 0, 0]);
  });

  it("condition toggling changes rendering only, not emitted frames", () => {
    const frames = (["none", "HH", "HV", "RH"] as Condition[]).map(() =>
      armFrame(NEUTRAL_PARAMS, 1.0),
    );
    for (const f of frames.slice(1)) expect(f).toEqual(frames[0]);
    // but the scene does change
    const none = buildScene(baseState(), { ...DEFAULT_SCENE, condition: "none" });
    const hv = buildScene(baseState(), { ...DEFAULT_SCENE, condition: "HV" });
    expect(hv.length).toBeGreaterThan(none.length);
  });
});

describe("ring rendering", () => {
  it("places 11 targets on the display ring", () => {
    const targets = ringTargetPositions();
    expect(targets).toHaveLength(11);
    for (const t of targets) {
      const d = Math.hypot(
        t[0] - RING_DISPLAY.center[0],
        t[1] - RING_DISPLAY.center[1],
        t[2] - RING_DISPLAY.center[2],
      );
      expect(d).toBeCloseTo(RING_DISPLAY.radius, 9);
    }
    expect(targets[0][1]).toBeCloseTo(0.56 + 0.225, 9);
  });

  it("marks the active target red and achieved targets green", () => {
    const state = baseState();
    state.task = {
      kind: "ring",
      status: "running",
      active: 1,
      goals: [0, 6, 1],
      shown_at: [0, 1, null],
      achieved_at: [0.5, null, null],
    };
    const balls = buildScene(state, DEFAULT_SCENE).filter((p) => p.kind === "ball");
    const colors = new Map<string, number>();
    for (const b of balls) colors.set(b.color, (colors.get(b.color) ?? 0) + 1);
    expect(colors.get("#45c96b")).toBe(1); // goal 0 achieved -> green
    expect(colors.get("#e0433b")).toBe(1); // goal 6 active -> red
  });

  it("renders the robot only from broadcast poses", () => {
    const state = baseState();
    state.poses = null;
    const prims = buildScene(state, { ...DEFAULT_SCENE, condition: "none" });
    // no robot links without a poses broadcast; just the ground line
    expect(prims.filter((p) => p.kind === "line")).toHaveLength(1);
  });
});

describe("posture rendering", () => {
  it("draws goal ghost markers from the goal_shown payload", () => {
    const state = baseState();
    state.task = {
      kind: "posture",
      status: "running",
      active: 0,
      goals: [0, 1, 2, 3],
      shown_at: [0, null, null, null],
      achieved_at: [null, null, null, null],
    };
    state.postureGoal = { elbow: [0.1, 0.8, 0.3], wrist: [0.2, 1.2, 0.5] };
    const ghosts = buildScene(state, DEFAULT_SCENE).filter(
      (p) => p.kind === "ball" && !p.filled,
    );
    expect(ghosts).toHaveLength(2);
  });
});
