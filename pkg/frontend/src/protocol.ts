// Wire types for the control-service protocol, and the gesture -> command
// mapping. Every user gesture maps to exactly one JSON message; the panel
// never simulates anything locally.

export interface ContinuousState {
  x: number;
  x_dot: number;
  theta: number;
  theta_dot: number;
}

export interface Metrics {
  steps_taken: number;
  best_trial_steps: number;
  unique_states: number;
  trial_count: number;
  rewind_count: number;
}

export interface RewindInfo {
  failure_time: number;
  target_time: number;
  escalation_level: number;
  restored_from: string;
}

export interface StateMessage {
  type: "state";
  seq: number;
  time_index: number;
  trial: number;
  state: ContinuousState;
  discrete_id: number;
  q_row: [number, number];
  last_reward: number;
  metrics: Metrics;
  last_rewind: RewindInfo | null;
}

export interface HelloMessage {
  type: "hello";
  config: {
    physics: { track_length: number; pole_length: number; dt: number };
    agent: Record<string, unknown>;
    [key: string]: unknown;
  };
}

export interface AckMessage {
  type: "ack";
  cmd: string;
  times?: number[];
  graph?: GraphExport;
}

export interface ErrorMessage {
  type: "error";
  cmd?: string;
  message: string;
}

export interface RewindEventMessage extends RewindInfo {
  type: "rewind_event";
}

export interface GraphExport {
  nodes: number[];
  edges: { from: number; to: number; count: number }[];
}

export type ServerMessage =
  | StateMessage
  | HelloMessage
  | AckMessage
  | ErrorMessage
  | RewindEventMessage
  | { type: "metrics" };

export type Command = Record<string, unknown> & { cmd: string };

// -- gestures -----------------------------------------------------------------

export const runCommand = (): Command => ({ cmd: "run" });
export const pauseCommand = (): Command => ({ cmd: "pause" });
export const stepCommand = (): Command => ({ cmd: "step" });
export const resetTrialCommand = (): Command => ({ cmd: "reset_trial" });
export const snapshotsCommand = (): Command => ({ cmd: "snapshots" });
export const graphCommand = (): Command => ({ cmd: "graph" });

export function rewindToTarget(targetTime: number): Command {
  return { cmd: "rewind", target_time: targetTime };
}

export function rewindStepsBack(steps: number): Command {
  return { cmd: "rewind", steps_back: steps };
}

export function setParamCommand(name: string, value: number | string | boolean): Command {
  return { cmd: "set_param", name, value };
}

export function setSpeedCommand(stepsPerSecond: number): Command {
  return { cmd: "set_speed", steps_per_second: stepsPerSecond };
}

// Snap a requested slider time onto the nearest stored snapshot at or below
// it (rewinds can only land on stored snapshots; the service would restore
// the nearest earlier one anyway, so the slider shows the truth up front).
export function snapSliderTime(requested: number, snapshotTimes: number[]): number | null {
  let best: number | null = null;
  for (const t of snapshotTimes) {
    if (t <= requested && (best === null || t > best)) best = t;
  }
  return best;
}
