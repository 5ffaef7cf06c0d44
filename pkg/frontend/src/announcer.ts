/**
 * Announcer and audio-cue ports.
 *
 * The client speaks through an Announcer (screen-reader speech) and signals
 * generation progress through a CuePlayer (short non-speech sounds). Both are
 * ports so a real adapter, a console printer, or a test recorder can plug in.
 * Announced text is passed through verbatim: what the engine sent is exactly
 * what gets spoken.
 */

export interface Announcer {
  announce(text: string): void;
}

export type AudioCue = "generation_started" | "generation_tick" | "generation_finished" | "generation_error";

export interface CuePlayer {
  play(cue: AudioCue): void;
}

/** Records everything for assertions in tests and transcripts. */
export class RecordingAnnouncer implements Announcer {
  readonly spoken: string[] = [];

  announce(text: string): void {
    this.spoken.push(text);
  }
}

export class RecordingCuePlayer implements CuePlayer {
  readonly played: AudioCue[] = [];

  play(cue: AudioCue): void {
    this.played.push(cue);
  }
}

/** Prints speech to a writable line sink; used by the console client. */
export class ConsoleAnnouncer implements Announcer {
  constructor(private readonly write: (line: string) => void) {}

  announce(text: string): void {
    for (const line of text.split("\n")) {
      this.write(`[speech] ${line}`);
    }
  }
}

export class SilentCuePlayer implements CuePlayer {
  play(): void {}
}
