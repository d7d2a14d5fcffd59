/** WebSocket session against the teleoperation service.
 *
 * Keeps the latest snapshot of every topic, emits steer frames at a fixed
 * rate, and reconnects automatically with a visible status callback. The
 * robot view renders only what the service broadcasts.
 */

import { ClientMsg, ServerMsg, decode, encode } from "./protocol.js";
import { SceneState, applyTaskEvent } from "./scene.js";

export type ConnectionStatus = "connecting" | "connected" | "lost";

export class CockpitClient {
  private ws: WebSocket | null = null;
  private seq = 0;
  private retryTimer: number | null = null;
  readonly state: SceneState = { poses: null, task: null, postureGoal: null, operatorArm: null };

  onStatus: (status: ConnectionStatus) => void = () => {};
  onMessage: (msg: ServerMsg) => void = () => {};
  lastJointState: number[] | null = null;

  constructor(public url: string, private retryMs = 1000) {}

  connect(): void {
    this.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.onStatus("connected");
    this.ws.onmessage = (ev: MessageEvent) => {
      const msg = decode(String(ev.data));
      if (msg) this.dispatch(msg);
    };
    this.ws.onclose = () => {
      this.onStatus("lost");
      this.scheduleRetry();
    };
    this.ws.onerror = () => {
      this.ws?.close();
    };
  }

  private scheduleRetry(): void {
    if (this.retryTimer != null) return;
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.connect();
    }, this.retryMs) as unknown as number;
  }

  private dispatch(msg: ServerMsg): void {
    switch (msg.type) {
      case "poses":
        this.state.poses = msg;
        break;
      case "joint_state":
        this.lastJointState = msg.theta;
        break;
      case "task_state":
        this.state.task = msg.task;
        if (msg.task == null || msg.task.kind !== "posture") this.state.postureGoal = null;
        break;
      case "task_event":
        applyTaskEvent(this.state, msg);
        break;
    }
    this.onMessage(msg);
  }

  get connected(): boolean {
    return this.ws?.readyState === WebSocket.OPEN;
  }

  send(msg: ClientMsg): boolean {
    if (!this.connected) return false; // input ignored while disconnected
    this.ws!.send(encode(msg));
    return true;
  }

  nextSeq(): number {
    return ++this.seq;
  }
}
