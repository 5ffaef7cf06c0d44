/**
 * EngineConnection — request/response correlation and event fan-out over an
 * abstract line transport.
 *
 * A Transport is anything that can send one line and deliver received lines:
 * a unix socket, a child process's stdio, or an in-memory pair in tests. The
 * connection assigns correlation ids, resolves the matching promise when the
 * response arrives, and forwards server-pushed events to subscribers.
 */

import {
  decodeMessage,
  encodeMessage,
  EventMessage,
  Op,
  ResponseMessage,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onLine(fn: (line: string) => void): () => void;
  close(): void;
}

export class EngineError extends Error {
  constructor(
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "EngineError";
  }
}

type EventListener = (event: EventMessage) => void;

interface PendingRequest {
  resolve: (payload: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

export class EngineConnection {
  private nextId = 1;
  private pending = new Map<number, PendingRequest>();
  private eventListeners = new Set<EventListener>();
  private unsubscribe: () => void;

  constructor(private readonly transport: Transport) {
    this.unsubscribe = transport.onLine((line) => this.handleLine(line));
  }

  request(op: Op, payload?: Record<string, unknown>): Promise<Record<string, unknown>> {
    const id = this.nextId++;
    const promise = new Promise<Record<string, unknown>>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.transport.send(
      encodeMessage(payload === undefined ? { kind: "request", id, op } : { kind: "request", id, op, payload }),
    );
    return promise;
  }

  onEvent(fn: EventListener): () => void {
    this.eventListeners.add(fn);
    return () => this.eventListeners.delete(fn);
  }

  close(): void {
    this.unsubscribe();
    for (const [, entry] of this.pending) {
      entry.reject(new EngineError("connection_closed", "connection closed"));
    }
    this.pending.clear();
    this.transport.close();
  }

  private handleLine(line: string): void {
    let message;
    try {
      message = decodeMessage(line);
    } catch {
      return; // a malformed engine line must never break the client
    }
    if (message.kind === "event") {
      for (const fn of this.eventListeners) fn(message);
      return;
    }
    if (message.kind === "response") {
      this.settle(message);
    }
  }

  private settle(response: ResponseMessage): void {
    if (response.id === null) return; // protocol_error for an unparseable line; nothing to correlate
    const entry = this.pending.get(response.id);
    if (!entry) return;
    this.pending.delete(response.id);
    if (response.ok) {
      entry.resolve(response.payload ?? {});
    } else {
      const err = response.error ?? { code: "unknown", message: "unknown engine error" };
      entry.reject(new EngineError(err.code, err.message));
    }
  }
}
