// WebSocket wrapper: feeds a PanelModel, reconnects with backoff, and sends
// exactly one message per gesture.

import { PanelModel } from "./model.js";
import type { Command, ServerMessage } from "./protocol.js";

// Structural subset of both the DOM WebSocket and the ws package's client;
// handler params are loose on purpose so either implementation slots in.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 10_000;

export class PanelConnection {
  readonly model: PanelModel;
  private socket: SocketLike | null = null;
  private backoffMs = BACKOFF_START_MS;
  private closed = false;
  private listeners: ((msg: ServerMessage) => void)[] = [];

  constructor(
    private readonly url: string,
    private readonly makeSocket: SocketFactory,
    private readonly schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
    model?: PanelModel,
  ) {
    this.model = model ?? new PanelModel();
  }

  connect(): void {
    this.model.connection = "connecting";
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.model.connection = "open";
      this.backoffMs = BACKOFF_START_MS;
    };
    socket.onmessage = (ev) => {
      let message: ServerMessage;
      try {
        message = JSON.parse(String(ev.data)) as ServerMessage;
      } catch {
        return;
      }
      this.model.apply(message);
      for (const listener of this.listeners) listener(message);
    };
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {
      /* onclose follows and handles the retry */
    };
  }

  private handleClose(): void {
    this.model.connection = "closed";
    this.socket = null;
    if (this.closed) return;
    this.schedule(() => {
      if (!this.closed) this.connect();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
  }

  send(command: Command): void {
    if (this.socket === null || this.model.connection !== "open") {
      throw new Error("not connected");
    }
    this.socket.send(JSON.stringify(command));
  }

  onMessage(listener: (msg: ServerMessage) => void): void {
    this.listeners.push(listener);
  }

  /** Resolves with the next message satisfying ``test`` (for tests/flows). */
  waitFor<T extends ServerMessage>(test: (msg: ServerMessage) => msg is T, timeoutMs = 5000): Promise<T> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out waiting for message")), timeoutMs);
      this.onMessage((msg) => {
        if (test(msg)) {
          clearTimeout(timer);
          resolve(msg);
        }
      });
    });
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}

export async function fetchSnapshotTimes(baseUrl: string): Promise<number[]> {
  const response = await fetch(`${baseUrl}/snapshot-times`);
  if (!response.ok) throw new Error(`snapshot-times failed: ${response.status}`);
  return (await response.json()) as number[];
}
