/**
 * Process client for the engine's stdio JSON protocol.
 *
 * The engine executable is resolved from the HOLOPIPE_CMD environment
 * variable (a whitespace-separated command line), falling back to the
 * installed `python3 -m holopipe.cli --rpc`.
 */

import { ChildProcess, spawn } from "node:child_process";
import { createInterface, Interface } from "node:readline";

import { HoloError } from "./errors.js";

interface Pending {
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
}

export function defaultCommand(): string[] {
  const override = process.env.HOLOPIPE_CMD;
  if (override && override.trim().length > 0) {
    return override.trim().split(/\s+/);
  }
  return ["python3", "-m", "holopipe.cli", "--rpc"];
}

export class EngineClient {
  private proc: ChildProcess;
  private reader: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;

  constructor(command?: string[]) {
    const cmd = command ?? defaultCommand();
    this.proc = spawn(cmd[0], cmd.slice(1), {
      stdio: ["pipe", "pipe", "inherit"],
    });
    this.reader = createInterface({ input: this.proc.stdout! });
    this.reader.on("line", (line) => this.onLine(line));
    this.proc.on("exit", () => {
      this.closed = true;
      for (const [, p] of this.pending) {
        p.reject(new Error("engine process exited"));
      }
      this.pending.clear();
    });
  }

  private onLine(line: string): void {
    let reply: {
      id: number | null;
      result?: unknown;
      error?: { code: number; message?: string };
    };
    try {
      reply = JSON.parse(line);
    } catch {
      return; // stray output, not a protocol line
    }
    if (reply.id === null || reply.id === undefined) return;
    const pending = this.pending.get(reply.id);
    if (!pending) return;
    this.pending.delete(reply.id);
    if (reply.error) {
      pending.reject(new HoloError(reply.error.code, reply.error.message));
    } else {
      pending.resolve(reply.result);
    }
  }

  request(op: string, body: Record<string, unknown> = {}): Promise<unknown> {
    if (this.closed) {
      return Promise.reject(new Error("engine process is not running"));
    }
    const id = this.nextId++;
    const line = JSON.stringify({ id, op, ...body }) + "\n";
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin!.write(line);
    });
  }

  /** Invoke a named engine function; rejects with HoloError on failure. */
  call(fn: string, args: unknown[] = []): Promise<unknown> {
    return this.request("call", { fn, args });
  }

  async ping(): Promise<boolean> {
    return (await this.request("ping")) === "pong";
  }

  async close(): Promise<void> {
    if (this.closed) return;
    try {
      await this.request("shutdown");
    } catch {
      /* already gone */
    }
    this.proc.stdin!.end();
    this.closed = true;
  }
}
