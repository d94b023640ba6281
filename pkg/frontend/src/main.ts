// Browser entry point: a WebSocket transport, pointer capture on the
// canvas, pickers from the live catalog, and a 60 Hz pose/draw loop.

import { PlayClient, Transport } from "./client.js";
import { DEFAULT_CALIBRATION, PointerEmulator } from "./emulate.js";
import { poseMessage } from "./protocol.js";
import { DEFAULT_VIEW, Scene, drawItems } from "./scene.js";

const canvas = document.getElementById("stage") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const prosthesisPicker = document.getElementById("prosthesis") as HTMLSelectElement;
const taskPicker = document.getElementById("task") as HTMLSelectElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;
const mirrorToggle = document.getElementById("mirror") as HTMLInputElement;
const retryButton = document.getElementById("retry") as HTMLButtonElement;

const view = { ...DEFAULT_VIEW, width: canvas.width, height: canvas.height };
const scene = new Scene(view);
const client = new PlayClient();
const emulator = new PointerEmulator({
  ...DEFAULT_CALIBRATION,
  originPx: { x: canvas.width / 2, y: canvas.height / 2 },
});

let sessionActive = false;
const t0 = performance.now();
const now = () => (performance.now() - t0) / 1000;

function connect(): void {
  statusEl.textContent = "connecting...";
  const ws = new WebSocket(`ws://${location.host}/ws`);
  const transport: Transport = {
    send: (text) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(text);
    },
    close: () => ws.close(),
  };
  ws.onopen = () => client.start(transport);
  ws.onmessage = (ev) => client.handleLine(String(ev.data));
  ws.onerror = () => client.connectionFailed("connection failed");
  ws.onclose = () => client.connectionClosed();
}

client.onFrame = (frame) => scene.ingest(frame);

client.onStateChange = (state) => {
  sessionActive = state.phase === "ready";
  retryButton.hidden = state.phase === "ready" || state.phase === "connecting";
  if (state.phase === "version_mismatch") {
    statusEl.textContent = `protocol version mismatch: ${state.lastError}`;
  } else if (state.phase === "error") {
    statusEl.textContent = `connection error: ${state.lastError ?? "unknown"}`;
  } else if (state.phase === "closed") {
    statusEl.textContent = "disconnected";
  } else if (state.phase === "ready") {
    statusEl.textContent = `playing as ${state.selectedProsthesis ?? "?"} / ${state.selectedTask}`;
  }
  if (prosthesisPicker.options.length !== state.catalog.length) {
    prosthesisPicker.innerHTML = "";
    for (const entry of state.catalog) {
      const opt = document.createElement("option");
      opt.value = entry.id;
      opt.textContent = entry.display_name;
      prosthesisPicker.appendChild(opt);
    }
  }
  if (state.selectedProsthesis) {
    prosthesisPicker.value = state.selectedProsthesis;
    scene.spec = client.selectedSpec()?.spec ?? null;
  }
};

prosthesisPicker.onchange = () => {
  client.selectProsthesis(prosthesisPicker.value);
  scene.setSpec(client.selectedSpec()?.spec ?? null);
};
taskPicker.onchange = () => {
  client.selectTask(taskPicker.value);
  scene.resetTask();
};
resetButton.onclick = () => {
  client.reset();
  scene.resetTask();
};
mirrorToggle.onchange = () => {
  scene.view.mirror = mirrorToggle.checked;
};
retryButton.onclick = () => connect();

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  emulator.handle({ kind: "move", t: now(), x: ev.clientX - rect.left, y: ev.clientY - rect.top });
});
canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button === 0) emulator.handle({ kind: "button", t: now(), pressed: true });
});
window.addEventListener("pointerup", (ev) => {
  if (ev.button === 0) emulator.handle({ kind: "button", t: now(), pressed: false });
});
window.addEventListener("keydown", (ev) => {
  if (ev.key === "Shift") emulator.handle({ kind: "modifier", t: now(), pressed: true });
});
window.addEventListener("keyup", (ev) => {
  if (ev.key === "Shift") emulator.handle({ kind: "modifier", t: now(), pressed: false });
});
canvas.addEventListener(
  "wheel",
  (ev) => {
    ev.preventDefault();
    emulator.handle({ kind: "wheel", t: now(), deltaY: ev.deltaY });
  },
  { passive: false },
);

function loop(): void {
  if (sessionActive) {
    const frame = emulator.sample(now());
    if (frame) client.sendRaw(poseMessage(frame));
  }
  drawItems(ctx, scene.renderList(), scene.view);
  requestAnimationFrame(loop);
}

connect();
requestAnimationFrame(loop);
