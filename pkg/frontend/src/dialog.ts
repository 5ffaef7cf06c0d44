/**
 * DialogState — view model for the assistance dialog.
 *
 * The dialog shows exactly one question/answer pair at a time plus a
 * conversation cursor rendered as "i of n". Older turns are reachable only
 * by moving the cursor; the view never accumulates a scrollback. The state
 * machine is pure: it holds what the UI should show and leaves rendering
 * and wire traffic to the client.
 */

export interface DialogPair {
  question: string;
  answer: string;
  turnId: number;
}

export class DialogState {
  private _visible = false;
  private _input = "";
  private _pair: DialogPair | null = null;
  private _cursorIndex = 0;
  private _cursorTotal = 0;

  get visible(): boolean {
    return this._visible;
  }

  get input(): string {
    return this._input;
  }

  get pair(): DialogPair | null {
    return this._pair;
  }

  open(): void {
    this._visible = true;
  }

  close(): void {
    this._visible = false;
    this._input = "";
  }

  setInput(text: string): void {
    this._input = text;
  }

  clearInput(): void {
    this._input = "";
  }

  /** Replace the single displayed pair and position the cursor. */
  showPair(pair: DialogPair, index: number, total: number): void {
    if (total < 0 || index < 1 || index > Math.max(total, 1)) {
      throw new RangeError(`cursor ${index} of ${total} out of range`);
    }
    this._pair = pair;
    this._cursorIndex = index;
    this._cursorTotal = total;
  }

  /** Move the cursor without changing the pair (pair arrives separately). */
  setCursor(index: number, total: number): void {
    this._cursorIndex = Math.min(Math.max(index, total > 0 ? 1 : 0), total);
    this._cursorTotal = total;
  }

  reset(): void {
    this._pair = null;
    this._cursorIndex = 0;
    this._cursorTotal = 0;
  }

  /** The "i of n" label read alongside the pair; empty with no history. */
  cursorLabel(): string {
    if (this._cursorTotal === 0) return "";
    return `${this._cursorIndex} of ${this._cursorTotal}`;
  }

  get cursorIndex(): number {
    return this._cursorIndex;
  }

  get cursorTotal(): number {
    return this._cursorTotal;
  }
}
