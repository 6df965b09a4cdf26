/** Client for the framed textual endpoint over its WebSocket bridge.

Owns the text buffer.  User edits go out as full-document didChange with a
strictly increasing version; server-pushed workspace/applyEdit requests
(the textual shadow of graph operations) are applied to the buffer
silently, answered with ``{applied: true}`` and never echoed back as a
didChange: the server already owns the resulting text.
*/

import {
  applyRangeEdit,
  frameMessage,
  unframeMessage,
  type Diagnostic,
  type Range,
  type RpcMessage,
} from "./protocol.js";
import type { WireSocket } from "./socket.js";

export interface TextHandlers {
  onDiagnostics?(uri: string, version: number, diagnostics: Diagnostic[]): void;
  onServerEdit?(uri: string, newText: string): void;
}

interface PendingRequest {
  resolve(value: any): void;
  reject(error: Error): void;
}

export class TextClient {
  buffer = "";
  uri: string | null = null;
  version = 0;
  diagnostics: Diagnostic[] = [];

  private nextId = 1;
  private readonly pending = new Map<number, PendingRequest>();

  constructor(
    private readonly socket: WireSocket,
    private readonly handlers: TextHandlers = {},
  ) {
    socket.subscribe({
      onMessage: (data) => this.dispatch(unframeMessage(data)),
    });
  }

  initialize(): Promise<unknown> {
    return this.request("initialize", {});
  }

  open(uri: string, text: string): void {
    this.uri = uri;
    this.buffer = text;
    this.version = 0;
    this.notify("textDocument/didOpen", {
      textDocument: { uri, text, version: this.version },
    });
  }

  /** A local edit: replaces the whole document at the next version. */
  edit(newText: string): void {
    if (this.uri === null) {
      throw new Error("no document open");
    }
    this.buffer = newText;
    this.version += 1;
    this.notify("textDocument/didChange", {
      textDocument: { uri: this.uri, version: this.version },
      contentChanges: [{ text: newText }],
    });
  }

  close(): void {
    if (this.uri === null) {
      return;
    }
    this.notify("textDocument/didClose", { textDocument: { uri: this.uri } });
    this.uri = null;
  }

  shutdown(): Promise<unknown> {
    return this.request("shutdown", {});
  }

  exit(): void {
    this.notify("exit", undefined);
  }

  private request(method: string, params: unknown): Promise<any> {
    const id = this.nextId;
    this.nextId += 1;
    const settle = new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.socket.send(frameMessage({ jsonrpc: "2.0", id, method, params }));
    return settle;
  }

  private notify(method: string, params: unknown): void {
    const message: Record<string, unknown> = { jsonrpc: "2.0", method };
    if (params !== undefined) {
      message.params = params;
    }
    this.socket.send(frameMessage(message));
  }

  private respond(id: number | string, result: unknown): void {
    this.socket.send(frameMessage({ jsonrpc: "2.0", id, result }));
  }

  private dispatch(message: RpcMessage): void {
    if (message.id !== undefined && message.method === undefined) {
      const entry = this.pending.get(message.id as number);
      if (!entry) {
        return;
      }
      this.pending.delete(message.id as number);
      if (message.error) {
        entry.reject(new Error(message.error.message));
      } else {
        entry.resolve(message.result);
      }
      return;
    }
    if (message.method === "textDocument/publishDiagnostics") {
      const { uri, version, diagnostics } = message.params;
      this.diagnostics = diagnostics;
      this.handlers.onDiagnostics?.(uri, version, diagnostics);
      return;
    }
    if (message.method === "workspace/applyEdit" && message.id !== undefined) {
      this.applyServerEdit(message.params);
      this.respond(message.id, { applied: true });
      return;
    }
    if (message.id !== undefined) {
      this.socket.send(
        frameMessage({
          jsonrpc: "2.0",
          id: message.id,
          error: { code: -32601, message: `method not found: ${message.method}` },
        }),
      );
    }
  }

  private applyServerEdit(params: { edit: { changes: Record<string, { range: Range; newText: string }[]> } }): void {
    for (const [uri, edits] of Object.entries(params.edit.changes)) {
      if (uri !== this.uri) {
        continue;
      }
      // apply bottom-up so earlier ranges stay valid
      const ordered = [...edits].sort(
        (a, b) => b.range.start.line - a.range.start.line || b.range.start.character - a.range.start.character,
      );
      for (const change of ordered) {
        this.buffer = applyRangeEdit(this.buffer, change.range, change.newText);
      }
      this.handlers.onServerEdit?.(uri, this.buffer);
    }
  }
}
