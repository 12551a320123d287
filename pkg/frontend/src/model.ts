// Panel state: a pure fold over server messages. Everything rendered comes
// from here, so reconnecting and replaying broadcasts reproduces the same
// display.

import type {
  GraphExport,
  HelloMessage,
  RewindInfo,
  ServerMessage,
  StateMessage,
} from "./protocol.js";

export interface HistoryPoint {
  step: number;        // cumulative training steps
  timeIndex: number;
  trial: number;
  bestSoFar: number;
  uniqueStates: number;
}

export interface RewindMark {
  step: number;
  info: RewindInfo;
}

export type ConnectionStatus = "connecting" | "open" | "closed";

const HISTORY_LIMIT = 2000;

export class PanelModel {
  connection: ConnectionStatus = "connecting";
  hello: HelloMessage | null = null;
  latest: StateMessage | null = null;
  history: HistoryPoint[] = [];
  rewindMarks: RewindMark[] = [];
  snapshotTimes: number[] = [];
  graph: GraphExport | null = null;
  lastError: string | null = null;
  // per-time Q-row display of the current timeline (trimmed on rewind)
  rowsByTime = new Map<number, [number, number]>();

  apply(message: ServerMessage): void {
    switch (message.type) {
      case "hello":
        this.hello = message;
        break;
      case "state":
        this.applyState(message);
        break;
      case "rewind_event":
        this.rewindMarks.push({
          step: this.latest?.metrics.steps_taken ?? 0,
          info: message,
        });
        break;
      case "error":
        this.lastError = message.message;
        break;
      case "ack":
        if (message.times) this.snapshotTimes = message.times;
        if (message.graph) this.graph = message.graph;
        break;
      default:
        break;
    }
  }

  private applyState(message: StateMessage): void {
    if (this.latest !== null && message.time_index < this.latest.time_index) {
      // the clock went backwards: drop display rows from the abandoned future
      for (const t of [...this.rowsByTime.keys()]) {
        if (t > message.time_index) this.rowsByTime.delete(t);
      }
    }
    this.latest = message;
    this.rowsByTime.set(message.time_index, message.q_row);
    this.history.push({
      step: message.metrics.steps_taken,
      timeIndex: message.time_index,
      trial: message.trial,
      bestSoFar: message.metrics.best_trial_steps,
      uniqueStates: message.metrics.unique_states,
    });
    if (this.history.length > HISTORY_LIMIT) {
      // keep every other old point; recent detail matters most
      const keep: HistoryPoint[] = [];
      for (let i = 0; i < this.history.length; i++) {
        if (i % 2 === 0 || i > this.history.length - 200) keep.push(this.history[i]);
      }
      this.history = keep;
    }
  }

  displayedRowAt(timeIndex: number): [number, number] | undefined {
    return this.rowsByTime.get(timeIndex);
  }
}
