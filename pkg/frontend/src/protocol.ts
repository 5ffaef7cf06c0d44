/**
 * Wire protocol types and framing for the assistance engine.
 *
 * The engine speaks newline-delimited JSON over a local stream socket or
 * stdio: one UTF-8 object per line, three message kinds (request, response,
 * event). This module owns the shapes and the line framing; it has no I/O.
 */

export type Op =
  | "ask"
  | "adaptive"
  | "describe"
  | "step_next"
  | "step_prev"
  | "conv_prev"
  | "conv_next"
  | "cancel"
  | "dismiss"
  | "clear_history"
  | "get_history"
  | "get_status";

export type EventType =
  | "generating_started"
  | "heartbeat"
  | "generating_finished"
  | "announce"
  | "focus_restored"
  | "error";

export interface RequestMessage {
  kind: "request";
  id: number;
  op: Op;
  payload?: Record<string, unknown>;
}

export interface ErrorInfo {
  code: string;
  message: string;
}

export interface ResponseMessage {
  kind: "response";
  id: number | null;
  ok: boolean;
  payload?: Record<string, unknown>;
  error?: ErrorInfo;
}

export interface EventMessage {
  kind: "event";
  event_type: EventType;
  session: string;
  payload: Record<string, unknown>;
  request_id?: string | null;
}

export type Message = RequestMessage | ResponseMessage | EventMessage;

export interface Step {
  index: number;
  text: string;
}

export interface GuidancePayload {
  turn_id: number;
  feature: "contextual_qa" | "adaptive_support" | "screen_description";
  preamble: string | null;
  steps: Step[];
  raw_text: string;
}

export interface StepNavPayload {
  step_index: number;
  text: string;
  boundary: boolean;
}

export interface ConvNavPayload {
  index: number;
  total: number;
  boundary: boolean;
}

export function encodeMessage(msg: Message): string {
  return JSON.stringify(msg) + "\n";
}

export function decodeMessage(line: string): Message {
  const obj = JSON.parse(line) as { kind?: unknown };
  if (obj.kind !== "request" && obj.kind !== "response" && obj.kind !== "event") {
    throw new Error(`unknown message kind: ${String(obj.kind)}`);
  }
  return obj as Message;
}

/**
 * Reassembles complete lines from arbitrarily fragmented stream chunks.
 * Empty lines are dropped, matching the engine's tolerance for them.
 */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    return parts.filter((line) => line.trim().length > 0);
  }

  /** Any trailing bytes not yet terminated by a newline. */
  pending(): string {
    return this.buffer;
  }
}
