import { describe, expect, it } from "vitest";
import { z } from "zod";

import { armFrame, clampParams, NEUTRAL_PARAMS, PARAM_RANGES, ArmParams } from "../src/arm.js";
import { FRAME_FIELDS, decode, encode, frameInvariantsOk, frameMsg } from "../src/protocol.js";

// independent mirror of the service-side frame schema
const frameDataSchema = z.object(
  Object.fromEntries(FRAME_FIELDS.map((f) => [f, z.number().finite()])),
);
const frameMsgSchema = z.object({
  type: z.literal("frame"),
  seq: z.number().int().positive(),
  data: frameDataSchema,
});

function randomParams(rand: () => number): ArmParams {
  const p = { ...NEUTRAL_PARAMS };
  for (const key of Object.keys(PARAM_RANGES) as (keyof ArmParams)[]) {
    const [lo, hi] = PARAM_RANGES[key];
    p[key] = lo + (hi - lo) * rand();
  }
  return clampParams(p);
}

// deterministic LCG so failures reproduce
function lcg(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (1664525 * s + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

describe("steer-loop frame conformance", () => {
  it("emits schema-valid frame messages for any steering state", () => {
    const rand = lcg(7);
    for (let i = 0; i < 500; i++) {
      const record = armFrame(randomParams(rand), i / 50);
      const msg = frameMsg(i + 1, record);
      expect(frameMsgSchema.safeParse(msg).success).toBe(true);
      expect(frameInvariantsOk(record)).toBe(true);
    }
  });

  it("keeps all three quaternions unit-norm", () => {
    const rand = lcg(99);
    for (let i = 0; i < 200; i++) {
      const r = armFrame(randomParams(rand), 0);
      for (const q of [
        [r.quw, r.qux, r.quy, r.quz],
        [r.qfw, r.qfx, r.qfy, r.qfz],
        [r.qhw, r.qhx, r.qhy, r.qhz],
      ]) {
        expect(Math.abs(Math.hypot(...q) - 1)).toBeLessThan(1e-9);
      }
    }
  });

  it("round-trips through encode/decode", () => {
    const msg = frameMsg(3, armFrame(NEUTRAL_PARAMS, 1.25));
    const text = encode(msg);
    expect(JSON.parse(text)).toEqual(msg);
    const decoded = decode('{"type":"ack","seq":3}');
    expect(decoded).toEqual({ type: "ack", seq: 3 });
    expect(decode("not json")).toBeNull();
  });

  it("rejects frames that would violate the service invariants", () => {
    const record = armFrame(NEUTRAL_PARAMS, 0);
    expect(frameInvariantsOk({ ...record, quw: 2 })).toBe(false);
    expect(frameInvariantsOk({ ...record, t: -1 })).toBe(false);
    expect(
      frameInvariantsOk({ ...record, ex: record.sx, ey: record.sy, ez: record.sz }),
    ).toBe(false);
  });
});
