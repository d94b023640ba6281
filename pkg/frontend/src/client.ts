// Transport-agnostic play client: handshake, pickers, frame routing.
//
// The same state machine runs over a browser WebSocket or a line-framed
// TCP socket (tests use the latter against the live Python service).

import type { CatalogEntry, FrameRecord, MetricsRecord, ServerMsg } from "./protocol.js";
import { PROTOCOL_VERSION, decodeServer, encode } from "./protocol.js";

export interface Transport {
  send(text: string): void;
  close(): void;
}

export type Phase = "connecting" | "ready" | "version_mismatch" | "error" | "closed";

export interface ClientState {
  phase: Phase;
  catalog: CatalogEntry[];
  lastError: string | null;
  framesSeen: number;
  eventsSeen: number;
  metrics: MetricsRecord | null;
  selectedProsthesis: string | null;
  selectedTask: string;
}

export class PlayClient {
  state: ClientState = {
    phase: "connecting",
    catalog: [],
    lastError: null,
    framesSeen: 0,
    eventsSeen: 0,
    metrics: null,
    selectedProsthesis: null,
    selectedTask: "ball",
  };
  onFrame: ((frame: FrameRecord) => void) | null = null;
  onStateChange: ((state: ClientState) => void) | null = null;
  private transport: Transport | null = null;

  start(transport: Transport, clientName = "play-station"): void {
    this.transport = transport;
    this.state.phase = "connecting";
    transport.send(encode({ type: "hello", version: PROTOCOL_VERSION, client_name: clientName }));
    this.changed();
  }

  handleLine(text: string): void {
    const msg = decodeServer(text);
    if (!msg) return;
    this.handleMessage(msg);
  }

  handleMessage(msg: ServerMsg): void {
    switch (msg.type) {
      case "hello_ack":
        this.state.phase = "ready";
        this.state.catalog = msg.catalog;
        if (!this.state.selectedProsthesis && msg.catalog.length) {
          this.state.selectedProsthesis = msg.catalog[0]!.id;
        }
        break;
      case "frame": {
        this.state.framesSeen += 1;
        const { type: _type, ...frame } = msg;
        if (frame.metrics) this.state.metrics = frame.metrics;
        this.onFrame?.(frame as FrameRecord);
        break;
      }
      case "metrics": {
        const { type: _type, ...metrics } = msg;
        this.state.metrics = metrics as MetricsRecord;
        break;
      }
      case "event":
        this.state.eventsSeen += 1;
        break;
      case "catalog":
        this.state.catalog = msg.catalog;
        break;
      case "error":
        if (msg.code === "VERSION_MISMATCH") {
          this.state.phase = "version_mismatch";
        } else {
          this.state.phase = this.state.phase === "connecting" ? "error" : this.state.phase;
        }
        this.state.lastError = `${msg.code}: ${msg.message}`;
        break;
    }
    this.changed();
  }

  connectionFailed(reason: string): void {
    this.state.phase = "error";
    this.state.lastError = reason;
    this.changed();
  }

  connectionClosed(): void {
    if (this.state.phase !== "version_mismatch" && this.state.phase !== "error") {
      this.state.phase = "closed";
    }
    this.changed();
  }

  sendRaw(text: string): void {
    this.transport?.send(text);
  }

  selectProsthesis(id: string): void {
    this.state.selectedProsthesis = id;
    this.transport?.send(encode({ type: "select_prosthesis", id }));
    this.changed();
  }

  selectTask(id: string, config: Record<string, unknown> = {}): void {
    this.state.selectedTask = id;
    this.transport?.send(encode({ type: "select_task", id, config }));
    this.changed();
  }

  reset(): void {
    this.transport?.send(encode({ type: "reset" }));
  }

  selectedSpec(): CatalogEntry | null {
    return this.state.catalog.find((e) => e.id === this.state.selectedProsthesis) ?? null;
  }

  private changed(): void {
    this.onStateChange?.(this.state);
  }
}
