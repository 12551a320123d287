// Browser entry point: wires the DOM to the connection and the renderers.

import { CartPoleView } from "./cartpole_view.js";
import { MetricChart } from "./charts.js";
import { PanelConnection, fetchSnapshotTimes } from "./connection.js";
import { GraphView } from "./graph_view.js";
import {
  graphCommand,
  pauseCommand,
  resetTrialCommand,
  rewindToTarget,
  runCommand,
  setParamCommand,
  setSpeedCommand,
  snapSliderTime,
  stepCommand,
} from "./protocol.js";

const params = new URLSearchParams(window.location.search);
const serviceHost = params.get("service") ?? window.location.host;
const httpBase = `${window.location.protocol}//${serviceHost}`;
const wsUrl = `${window.location.protocol === "https:" ? "wss" : "ws"}://${serviceHost}/ws`;

const el = <T extends HTMLElement>(id: string): T => {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
};

const connection = new PanelConnection(wsUrl, (url) => new WebSocket(url));
const model = connection.model;

const cartView = new CartPoleView(el<HTMLCanvasElement>("cartpole"));
const bestChart = new MetricChart(el<HTMLCanvasElement>("chart-best"), {
  label: "best trial steps (so far) vs training steps",
  pick: (p) => p.bestSoFar,
  color: "#2980b9",
});
const uniqueChart = new MetricChart(el<HTMLCanvasElement>("chart-unique"), {
  label: "unique states vs training steps",
  pick: (p) => p.uniqueStates,
  color: "#27ae60",
});
const graphView = new GraphView(el<HTMLCanvasElement>("graph"));

const banner = el<HTMLDivElement>("banner");
const readout = el<HTMLDivElement>("readout");
const errorBox = el<HTMLDivElement>("errors");
const slider = el<HTMLInputElement>("rewind-slider");
const sliderLabel = el<HTMLSpanElement>("rewind-label");

function send(command: Record<string, unknown> & { cmd: string }): void {
  try {
    connection.send(command);
  } catch (err) {
    errorBox.textContent = String(err);
  }
}

el<HTMLButtonElement>("btn-run").onclick = () => send(runCommand());
el<HTMLButtonElement>("btn-pause").onclick = () => send(pauseCommand());
el<HTMLButtonElement>("btn-step").onclick = () => send(stepCommand());
el<HTMLButtonElement>("btn-reset").onclick = () => send(resetTrialCommand());

slider.onchange = () => {
  const requested = Number(slider.value);
  const snapped = snapSliderTime(requested, model.snapshotTimes);
  const now = model.latest?.time_index ?? 0;
  if (snapped === null || snapped >= now) return;
  send(rewindToTarget(snapped));
};

function bindParam(inputId: string, name: string, parse: (v: string) => number | string | boolean): void {
  const input = el<HTMLInputElement | HTMLSelectElement>(inputId);
  input.onchange = () => send(setParamCommand(name, parse(input.value)));
}
bindParam("param-epsilon", "epsilon", Number);
bindParam("param-alpha", "alpha", Number);
bindParam("param-temperature", "temperature", Number);
bindParam("param-rewind-kind", "rewind_kind", String);
bindParam("param-rewind-k", "rewind_k", Number);
bindParam("param-rewind-p", "rewind_p", Number);
el<HTMLInputElement>("param-escalation").onchange = () =>
  send(setParamCommand("rewind_escalation", el<HTMLInputElement>("param-escalation").checked));
el<HTMLInputElement>("param-speed").onchange = () =>
  send(setSpeedCommand(Number(el<HTMLInputElement>("param-speed").value)));

async function refreshSnapshots(): Promise<void> {
  try {
    model.snapshotTimes = await fetchSnapshotTimes(httpBase);
  } catch {
    /* service briefly away; the banner already says so */
  }
}

setInterval(() => {
  if (model.connection === "open") {
    send(graphCommand());
    void refreshSnapshots();
  }
}, 2000);

function render(): void {
  const state = model.latest;
  banner.textContent =
    model.connection === "open"
      ? ""
      : model.connection === "connecting"
        ? "connecting..."
        : "disconnected - retrying";
  banner.style.display = model.connection === "open" ? "none" : "block";

  if (model.hello) {
    const physics = model.hello.config.physics;
    cartView.setGeometry({ trackLength: physics.track_length, poleLength: physics.pole_length });
  }
  cartView.draw(state?.state ?? null, (state?.last_reward ?? 0) < 0);
  bestChart.draw(model.history, model.rewindMarks);
  uniqueChart.draw(model.history, model.rewindMarks);
  graphView.draw(model.graph, state?.discrete_id ?? null);

  if (state) {
    slider.max = String(Math.max(1, state.time_index));
    sliderLabel.textContent = `t=${state.time_index}`;
    const q = state.q_row.map((v) => v.toFixed(4)).join(" / ");
    readout.textContent =
      `trial ${state.trial}  t=${state.time_index}  cell ${state.discrete_id}  ` +
      `Q(left/right)=${q}  steps=${state.metrics.steps_taken}  ` +
      `best=${state.metrics.best_trial_steps}  unique=${state.metrics.unique_states}  ` +
      `rewinds=${state.metrics.rewind_count}`;
  }
  if (model.lastError) {
    errorBox.textContent = model.lastError;
    model.lastError = null;
  }
  requestAnimationFrame(render);
}

connection.connect();
void refreshSnapshots();
requestAnimationFrame(render);
