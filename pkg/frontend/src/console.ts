/**
 * Console REPL for the assistance engine.
 *
 * Usage:
 *   node dist/console.js --socket /tmp/srassist.sock
 *   node dist/console.js --spawn "srassist serve --stdio --scenario copilot_agent_mode"
 *
 * Commands:
 *   /ask <question>   contextual Q&A
 *   /adaptive         re-plan from the recent trace and stalled step
 *   /describe         describe the current screen
 *   /next  /prev      walk answer steps
 *   /convnext /convprev  walk the conversation
 *   /clear            clear conversation history
 *   /cancel           cancel the in-flight generation
 *   /dismiss          close the dialog (engine restores focus)
 *   /quit             exit
 *
 * Engine speech is printed as `[speech] ...` lines; audio cues as `[cue] ...`.
 */

import { createInterface } from "node:readline";
import process from "node:process";

import { ConsoleAnnouncer, AudioCue, CuePlayer } from "./announcer.js";
import { AssistClient, NullFocusPort } from "./client.js";
import { EngineConnection, EngineError, Transport } from "./connection.js";
import { ProcessTransport, SocketTransport } from "./transports.js";

class ConsoleCuePlayer implements CuePlayer {
  constructor(private readonly write: (line: string) => void) {}

  play(cue: AudioCue): void {
    this.write(`[cue] ${cue}`);
  }
}

async function makeTransport(argv: string[]): Promise<Transport> {
  const socketIdx = argv.indexOf("--socket");
  if (socketIdx !== -1 && argv[socketIdx + 1]) {
    return SocketTransport.connect(argv[socketIdx + 1]);
  }
  const spawnIdx = argv.indexOf("--spawn");
  if (spawnIdx !== -1 && argv[spawnIdx + 1]) {
    const [command, ...args] = argv[spawnIdx + 1].split(/\s+/);
    return new ProcessTransport(command, args);
  }
  throw new Error("pass --socket <path> or --spawn \"<engine command>\"");
}

export async function main(argv: string[] = process.argv.slice(2)): Promise<void> {
  const write = (line: string) => process.stdout.write(line + "\n");
  let transport: Transport;
  try {
    transport = await makeTransport(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    process.exitCode = 1;
    return;
  }

  const client = new AssistClient(new EngineConnection(transport), {
    announcer: new ConsoleAnnouncer(write),
    cues: new ConsoleCuePlayer(write),
    focus: new NullFocusPort(),
  });

  const rl = createInterface({ input: process.stdin, output: process.stdout, prompt: "> " });
  rl.prompt();
  // Commands run strictly in order; stdin EOF waits for the chain to drain
  // so piped scripts see every response before the connection closes.
  let chain = Promise.resolve(true);
  rl.on("line", (raw) => {
    chain = chain.then(async (keepGoing) => {
      if (!keepGoing) return false;
      const next = await handleCommand(client, raw.trim(), write);
      if (next) rl.prompt();
      else rl.close();
      return next;
    });
  });
  await new Promise<void>((resolve) => rl.on("close", resolve));
  await chain;
  client.close();
}

async function handleCommand(
  client: AssistClient,
  raw: string,
  write: (line: string) => void,
): Promise<boolean> {
  if (raw.length === 0) return true;
  const [command, ...rest] = raw.split(/\s+/);
  const argument = rest.join(" ");
  try {
    switch (command) {
      case "/ask":
        await client.ask(argument);
        break;
      case "/adaptive":
        await client.adaptive();
        break;
      case "/describe":
        await client.describe();
        break;
      case "/next":
        await client.stepNext();
        break;
      case "/prev":
        await client.stepPrev();
        break;
      case "/convnext":
        await client.convNext();
        break;
      case "/convprev":
        await client.convPrev();
        break;
      case "/clear":
        await client.clearHistory();
        write("history cleared");
        break;
      case "/cancel":
        write((await client.cancel()) ? "cancelled" : "nothing to cancel");
        break;
      case "/dismiss":
        await client.dismiss();
        break;
      case "/quit":
        return false;
      default:
        write(`unknown command: ${command}`);
    }
  } catch (err) {
    if (err instanceof EngineError) {
      write(`[engine ${err.code}] ${err.message}`);
    } else {
      throw err;
    }
  }
  return true;
}

const isDirectRun = process.argv[1]?.endsWith("console.js") ?? false;
if (isDirectRun) {
  void main();
}
