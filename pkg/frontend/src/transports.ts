/**
 * Concrete transports: a unix stream socket and a spawned engine process
 * speaking the protocol on its stdio. Both deliver reassembled lines to
 * subscribers via a LineSplitter.
 */

import { connect, Socket } from "node:net";
import { ChildProcess, spawn } from "node:child_process";

import { Transport } from "./connection.js";
import { LineSplitter } from "./protocol.js";

type LineListener = (line: string) => void;

class StreamLineFanout {
  private splitter = new LineSplitter();
  private listeners = new Set<LineListener>();

  feed(chunk: Buffer | string): void {
    for (const line of this.splitter.push(chunk.toString("utf-8"))) {
      for (const fn of this.listeners) fn(line);
    }
  }

  add(fn: LineListener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }
}

export class SocketTransport implements Transport {
  private fanout = new StreamLineFanout();

  private constructor(private readonly socket: Socket) {
    socket.on("data", (chunk) => this.fanout.feed(chunk));
  }

  /** Connects to the engine's unix socket; the error names the path. */
  static connect(socketPath: string): Promise<SocketTransport> {
    return new Promise((resolve, reject) => {
      const socket = connect(socketPath);
      socket.once("connect", () => resolve(new SocketTransport(socket)));
      socket.once("error", (err) => {
        reject(new Error(`could not connect to engine socket ${socketPath}: ${err.message}`));
      });
    });
  }

  send(line: string): void {
    this.socket.write(line);
  }

  onLine(fn: LineListener): () => void {
    return this.fanout.add(fn);
  }

  close(): void {
    this.socket.end();
  }
}

export class ProcessTransport implements Transport {
  private fanout = new StreamLineFanout();
  private child: ChildProcess;

  /** Spawns the engine (e.g. `srassist serve --stdio ...`) and speaks on its stdio. */
  constructor(command: string, args: string[]) {
    this.child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    this.child.stdout!.on("data", (chunk: Buffer) => this.fanout.feed(chunk));
  }

  send(line: string): void {
    this.child.stdin!.write(line);
  }

  onLine(fn: LineListener): () => void {
    return this.fanout.add(fn);
  }

  close(): void {
    this.child.stdin!.end();
    this.child.kill();
  }
}
