/** Cockpit wiring: canvas rendering, pointer steering, condition toggles.
 *
 * Query parameters: ?url=ws://host:port selects the service endpoint,
 * &condition=HV presets the visualization condition.
 */

import {
  ArmParams,
  NEUTRAL_PARAMS,
  PARAM_RANGES,
  armFrame,
  armPose,
  clampParams,
} from "./arm.js";
import { CockpitClient } from "./client.js";
import { Condition, CONDITIONS, frameInvariantsOk, frameMsg } from "./protocol.js";
import { Camera, DEFAULT_SCENE, SceneConfig, buildScene } from "./scene.js";

const SEND_RATE_HZ = 50;

const query = new URLSearchParams(location.search);
const wsUrl = query.get("url") ?? "ws://127.0.0.1:8766";
const presetCondition = (query.get("condition") ?? "none") as Condition;

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const camera = new Camera();

let params: ArmParams = { ...NEUTRAL_PARAMS };
const sceneConfig: SceneConfig = {
  ...DEFAULT_SCENE,
  condition: CONDITIONS.includes(presetCondition) ? presetCondition : "none",
};

const client = new CockpitClient(wsUrl);
client.onStatus = (status) => {
  banner.textContent =
    status === "connected" ? `connected to ${wsUrl}` : `connection ${status} (${wsUrl})`;
  banner.className = status;
};
client.connect();

// ------------------------------------------------------------------ controls

const slidersHost = document.getElementById("sliders")!;
const twistKeys: (keyof ArmParams)[] = ["upperTwist", "foreTwist", "handFlexion", "handRoll"];
const sliderLabels: Record<string, string> = {
  upperTwist: "upper-arm twist",
  foreTwist: "forearm twist",
  handFlexion: "hand flexion",
  handRoll: "hand roll",
};
for (const key of twistKeys) {
  const wrap = document.createElement("label");
  wrap.textContent = sliderLabels[key];
  const input = document.createElement("input");
  input.type = "range";
  const [lo, hi] = PARAM_RANGES[key];
  input.min = String(lo);
  input.max = String(hi);
  input.step = "0.01";
  input.value = String(params[key]);
  input.addEventListener("input", () => {
    params = clampParams({ ...params, [key]: Number(input.value) });
  });
  wrap.appendChild(input);
  slidersHost.appendChild(wrap);
}

const conditionsHost = document.getElementById("conditions")!;
for (const value of CONDITIONS) {
  const button = document.createElement("button");
  button.textContent = value;
  button.dataset.condition = value;
  button.addEventListener("click", () => {
    sceneConfig.condition = value;
    client.send({ type: "set_condition", value });
    refreshConditionButtons();
  });
  conditionsHost.appendChild(button);
}
function refreshConditionButtons(): void {
  conditionsHost.querySelectorAll("button").forEach((b) => {
    b.classList.toggle("active", b.dataset.condition === sceneConfig.condition);
  });
}
refreshConditionButtons();

(document.getElementById("overlay") as HTMLInputElement).addEventListener("change", (ev) => {
  sceneConfig.overlayOnRobot = (ev.target as HTMLInputElement).checked;
});
document.getElementById("start-ring")!.addEventListener("click", () => {
  client.send({ type: "start_task", kind: "ring" });
});
document.getElementById("start-posture")!.addEventListener("click", () => {
  client.send({ type: "start_task", kind: "posture" });
});
document.getElementById("reset")!.addEventListener("click", () => {
  client.send({ type: "reset" });
});

// pointer steering: drag the elbow handle to aim the upper arm, the wrist
// handle (or shift-drag anywhere) to open/close the elbow
type DragMode = "aim" | "elbow" | null;
let drag: DragMode = null;
let dragStart: [number, number] | null = null;
let dragParams: ArmParams = params;

function handleScreenPos(which: "elbow" | "wrist"): [number, number] {
  const pose = armPose(params);
  const p = which === "elbow" ? pose.elbow : pose.wrist;
  const [x, y] = camera.project(p, canvas.width, canvas.height);
  return [x, y];
}

canvas.addEventListener("pointerdown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const x = ev.clientX - rect.left;
  const y = ev.clientY - rect.top;
  const near = (p: [number, number]) => Math.hypot(p[0] - x, p[1] - y) < 26;
  if (ev.shiftKey || near(handleScreenPos("wrist"))) drag = "elbow";
  else if (near(handleScreenPos("elbow"))) drag = "aim";
  else drag = "aim";
  dragStart = [x, y];
  dragParams = { ...params };
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointermove", (ev) => {
  if (!drag || !dragStart) return;
  const rect = canvas.getBoundingClientRect();
  const dx = ev.clientX - rect.left - dragStart[0];
  const dy = ev.clientY - rect.top - dragStart[1];
  if (drag === "aim") {
    params = clampParams({
      ...dragParams,
      azimuth: dragParams.azimuth - dx * 0.008,
      elevation: dragParams.elevation - dy * 0.008,
    });
  } else {
    params = clampParams({ ...dragParams, elbow: dragParams.elbow - dy * 0.01 });
  }
});
canvas.addEventListener("pointerup", () => {
  drag = null;
  dragStart = null;
});

// ---------------------------------------------------------------- steer loop

setInterval(() => {
  const record = armFrame(params, performance.now() / 1000);
  if (frameInvariantsOk(record)) {
    client.send(frameMsg(client.nextSeq(), record));
  }
}, 1000 / SEND_RATE_HZ);

// --------------------------------------------------------------- render loop

function draw(): void {
  ctx.fillStyle = "#141820";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  client.state.operatorArm = armPose(params);
  const prims = buildScene(client.state, sceneConfig);
  const projected = prims.map((p) => {
    const depth =
      p.kind === "line"
        ? (camera.project(p.a, canvas.width, canvas.height)[2] +
            camera.project(p.b, canvas.width, canvas.height)[2]) / 2
        : camera.project(p.at, canvas.width, canvas.height)[2];
    return { p, depth };
  });
  projected.sort((a, b) => b.depth - a.depth);

  for (const { p } of projected) {
    if (p.kind === "line") {
      const [ax, ay] = camera.project(p.a, canvas.width, canvas.height);
      const [bx, by] = camera.project(p.b, canvas.width, canvas.height);
      ctx.strokeStyle = p.color;
      ctx.lineWidth = p.width;
      ctx.lineCap = "round";
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    } else {
      const [x, y, depth] = camera.project(p.at, canvas.width, canvas.height);
      const r = Math.max(2, p.radius * camera.pixelScale(depth, canvas.width));
      ctx.beginPath();
      ctx.arc(x, y, r, 0, 2 * Math.PI);
      if (p.filled) {
        ctx.fillStyle = p.color;
        ctx.fill();
      } else {
        ctx.strokeStyle = p.color;
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    }
  }

  // steering handles on top
  for (const which of ["elbow", "wrist"] as const) {
    const [x, y] = handleScreenPos(which);
    ctx.beginPath();
    ctx.arc(x, y, 10, 0, 2 * Math.PI);
    ctx.strokeStyle = "#f5f5f5";
    ctx.lineWidth = 2;
    ctx.stroke();
  }

  requestAnimationFrame(draw);
}
requestAnimationFrame(draw);
