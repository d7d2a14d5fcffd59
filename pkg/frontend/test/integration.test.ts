/** Integration against the real service: the steer loop's frames must all
 * parse, and sweeping the elbow handle must sweep the robot's joint 4
 * monotonically. Uses the TCP endpoint (same payloads as the WebSocket).
 */

import { spawn, ChildProcess } from "node:child_process";
import net from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { NEUTRAL_PARAMS, armFrame, clampParams } from "../src/arm.js";
import { ServerMsg, encode, frameMsg } from "../src/protocol.js";

const PORT = 28000 + Math.floor(Math.random() * 20000);
let service: ChildProcess;

function startService(): Promise<void> {
  service = spawn(
    "python3",
    ["-m", "armteleop.cli", "serve", "--port", String(PORT), "--ws-port", String(PORT + 1)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  return new Promise((resolve, reject) => {
    const probe = () => {
      const sock = net.connect({ host: "127.0.0.1", port: PORT }, () => {
        sock.destroy();
        resolve();
      });
      sock.on("error", () => {
        sock.destroy();
        setTimeout(probe, 200);
      });
    };
    service.on("error", reject);
    setTimeout(probe, 300);
    setTimeout(() => reject(new Error("service did not come up")), 15000);
  });
}

beforeAll(async () => {
  await startService();
}, 20000);

afterAll(() => {
  service?.kill("SIGINT");
});

function collectMessages(sock: net.Socket, sink: ServerMsg[]): void {
  let buffer = "";
  sock.on("data", (chunk) => {
    buffer += chunk.toString();
    let nl;
    while ((nl = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, nl);
      buffer = buffer.slice(nl + 1);
      if (line.trim()) sink.push(JSON.parse(line) as ServerMsg);
    }
  });
}

describe("cockpit against the live service", () => {
  it("steer frames all parse and an elbow sweep drives joint 4 monotonically", async () => {
    const sock = net.connect({ host: "127.0.0.1", port: PORT });
    await new Promise<void>((res) => sock.on("connect", () => res()));
    const received: ServerMsg[] = [];
    collectMessages(sock, received);

    // sweep the elbow handle through its range at the steer rate
    const steps = 80;
    const elbowAt = (i: number) => 3.0 - (2.6 * i) / (steps - 1); // 3.0 -> 0.4 rad
    let seq = 0;
    for (let i = 0; i < steps; i++) {
      const params = clampParams({ ...NEUTRAL_PARAMS, elbow: elbowAt(i) });
      sock.write(encode(frameMsg(++seq, armFrame(params, i / 50))) + "\n");
      await new Promise((res) => setTimeout(res, 20));
    }
    // let the controller settle on the final pose
    await new Promise((res) => setTimeout(res, 500));
    sock.destroy();

    const acks = received.filter((m) => m.type === "ack");
    const errors = received.filter((m) => m.type === "error");
    const states = received.filter((m) => m.type === "joint_state");

    expect(errors).toHaveLength(0); // every emitted frame parsed
    expect(acks.length).toBe(steps);
    expect(states.length).toBeGreaterThan(50);

    // joint 4 follows the elbow monotonically (calibration offsets the raw
    // opening angle, so closing the elbow lowers theta4)
    const theta4 = states.map((m) => (m as { theta: number[] }).theta[3]);
    const tolerance = 1e-9;
    for (let i = 1; i < theta4.length; i++) {
      expect(theta4[i]).toBeLessThanOrEqual(theta4[i - 1] + tolerance);
    }
    const span = theta4[0] - theta4[theta4.length - 1];
    expect(span).toBeGreaterThan(1.5); // the sweep actually travelled
  }, 30000);

  it("condition toggles round-trip through the service", async () => {
    const sock = net.connect({ host: "127.0.0.1", port: PORT });
    await new Promise<void>((res) => sock.on("connect", () => res()));
    const received: ServerMsg[] = [];
    collectMessages(sock, received);

    sock.write(encode({ type: "set_condition", value: "HV" }) + "\n");
    await new Promise((res) => setTimeout(res, 300));
    sock.destroy();

    const snapshots = received.filter((m) => m.type === "task_state");
    expect(snapshots.length).toBeGreaterThan(0);
    expect((snapshots.at(-1) as { condition: string }).condition).toBe("HV");
  }, 15000);
});
