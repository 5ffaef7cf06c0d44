/**
 * ShortcutMap — keyboard bindings for the assistance dialog.
 *
 * Every action has exactly one key and every key maps to exactly one action;
 * the constructor rejects duplicate bindings so a miskeyed config cannot
 * silently shadow a command. Keys are compared case-insensitively by their
 * KeyboardEvent-style key name ("Escape", "ArrowDown", "p", ...).
 */

export type ShortcutAction =
  | "send"
  | "dismiss"
  | "step_next"
  | "step_prev"
  | "conv_next"
  | "conv_prev"
  | "clear_history"
  | "describe"
  | "adaptive";

export const DEFAULT_BINDINGS: Record<ShortcutAction, string> = {
  send: "s",
  dismiss: "Escape",
  step_next: "ArrowDown",
  step_prev: "ArrowUp",
  conv_next: "n",
  conv_prev: "p",
  clear_history: "c",
  describe: "d",
  adaptive: "a",
};

export class ShortcutMap {
  private byKey = new Map<string, ShortcutAction>();

  constructor(bindings: Record<ShortcutAction, string> = DEFAULT_BINDINGS) {
    for (const [action, key] of Object.entries(bindings) as [ShortcutAction, string][]) {
      const normalized = key.toLowerCase();
      const existing = this.byKey.get(normalized);
      if (existing !== undefined) {
        throw new Error(`duplicate shortcut "${key}" bound to both ${existing} and ${action}`);
      }
      this.byKey.set(normalized, action);
    }
  }

  lookup(key: string): ShortcutAction | undefined {
    return this.byKey.get(key.toLowerCase());
  }

  keyFor(action: ShortcutAction): string | undefined {
    for (const [key, bound] of this.byKey) {
      if (bound === action) return key;
    }
    return undefined;
  }
}
