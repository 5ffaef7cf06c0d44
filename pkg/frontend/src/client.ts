/**
 * AssistClient — ties the engine connection to the dialog view model, the
 * screen-reader announcer, the audio cues, and the focus port.
 *
 * Focus discipline: focus is saved when the dialog opens and restored only
 * when the engine pushes `focus_restored` (after dismiss). Step and
 * conversation navigation never touch focus — the engine announces the text
 * and the client speaks it verbatim.
 */

import { Announcer, CuePlayer } from "./announcer.js";
import { EngineConnection, EngineError } from "./connection.js";
import { DialogState } from "./dialog.js";
import { ShortcutAction } from "./shortcuts.js";
import {
  ConvNavPayload,
  EventMessage,
  GuidancePayload,
  StepNavPayload,
} from "./protocol.js";

export interface FocusPort {
  save(): void;
  restore(): void;
}

export class NullFocusPort implements FocusPort {
  save(): void {}
  restore(): void {}
}

export const EMPTY_QUESTION_MESSAGE = "Type a question first.";

export interface AssistClientPorts {
  announcer: Announcer;
  cues: CuePlayer;
  focus: FocusPort;
}

export class AssistClient {
  readonly dialog = new DialogState();
  private readonly announcer: Announcer;
  private readonly cues: CuePlayer;
  private readonly focus: FocusPort;
  private unsubscribe: () => void;

  constructor(
    private readonly connection: EngineConnection,
    ports: AssistClientPorts,
  ) {
    this.announcer = ports.announcer;
    this.cues = ports.cues;
    this.focus = ports.focus;
    this.unsubscribe = connection.onEvent((event) => this.handleEvent(event));
  }

  async ask(question: string): Promise<GuidancePayload | null> {
    const trimmed = question.trim();
    if (trimmed.length === 0) {
      // Validated locally: an empty question never goes over the wire.
      this.announcer.announce(EMPTY_QUESTION_MESSAGE);
      return null;
    }
    this.openDialog();
    const payload = (await this.connection.request("ask", { question: trimmed })) as unknown as GuidancePayload;
    this.showTurn(trimmed, payload);
    return payload;
  }

  async adaptive(): Promise<GuidancePayload> {
    this.openDialog();
    const payload = (await this.connection.request("adaptive")) as unknown as GuidancePayload;
    this.showTurn("(adaptive support)", payload);
    return payload;
  }

  async describe(): Promise<GuidancePayload> {
    this.openDialog();
    const payload = (await this.connection.request("describe")) as unknown as GuidancePayload;
    this.showTurn("(screen description)", payload);
    return payload;
  }

  async stepNext(): Promise<StepNavPayload> {
    return (await this.connection.request("step_next")) as unknown as StepNavPayload;
  }

  async stepPrev(): Promise<StepNavPayload> {
    return (await this.connection.request("step_prev")) as unknown as StepNavPayload;
  }

  async convNext(): Promise<ConvNavPayload> {
    const payload = (await this.connection.request("conv_next")) as unknown as ConvNavPayload;
    this.dialog.setCursor(payload.index, payload.total);
    return payload;
  }

  async convPrev(): Promise<ConvNavPayload> {
    const payload = (await this.connection.request("conv_prev")) as unknown as ConvNavPayload;
    this.dialog.setCursor(payload.index, payload.total);
    return payload;
  }

  async dismiss(): Promise<void> {
    await this.connection.request("dismiss");
    this.dialog.close();
  }

  async cancel(): Promise<boolean> {
    const payload = await this.connection.request("cancel");
    return Boolean(payload.cancelled);
  }

  async clearHistory(): Promise<void> {
    await this.connection.request("clear_history");
    this.dialog.reset();
  }

  /** Shortcut dispatch; engine refusals become speech instead of throws. */
  async perform(action: ShortcutAction): Promise<void> {
    try {
      switch (action) {
        case "send":
          await this.ask(this.dialog.input);
          this.dialog.clearInput();
          break;
        case "dismiss":
          await this.dismiss();
          break;
        case "step_next":
          await this.stepNext();
          break;
        case "step_prev":
          await this.stepPrev();
          break;
        case "conv_next":
          await this.convNext();
          break;
        case "conv_prev":
          await this.convPrev();
          break;
        case "clear_history":
          await this.clearHistory();
          break;
        case "describe":
          await this.describe();
          break;
        case "adaptive":
          await this.adaptive();
          break;
      }
    } catch (err) {
      if (err instanceof EngineError) {
        this.announcer.announce(
          err.code === "busy" ? "The assistant is still working. Press Escape to cancel." : err.message,
        );
        return;
      }
      throw err;
    }
  }

  close(): void {
    this.unsubscribe();
    this.connection.close();
  }

  private openDialog(): void {
    if (!this.dialog.visible) {
      this.focus.save();
      this.dialog.open();
    }
  }

  private showTurn(question: string, guidance: GuidancePayload): void {
    // Turn ids are sequential per session, so the newest turn id is also the
    // conversation length and the cursor lands on the latest pair.
    this.dialog.showPair(
      { question, answer: guidance.raw_text, turnId: guidance.turn_id },
      guidance.turn_id,
      guidance.turn_id,
    );
  }

  private handleEvent(event: EventMessage): void {
    switch (event.event_type) {
      case "generating_started":
        this.cues.play("generation_started");
        break;
      case "heartbeat":
        this.cues.play("generation_tick");
        break;
      case "generating_finished":
        this.cues.play(event.payload.status === "ok" ? "generation_finished" : "generation_error");
        break;
      case "announce":
        this.announcer.announce(String(event.payload.text ?? ""));
        break;
      case "focus_restored":
        this.focus.restore();
        break;
      case "error":
        this.announcer.announce(String(event.payload.message ?? "The assistant hit an error."));
        break;
    }
  }
}
