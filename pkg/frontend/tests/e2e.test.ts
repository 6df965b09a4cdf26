/** Full round trip against the real server process.

Spawns the Python server, opens both endpoints over WebSocket, and checks
that one palette operation updates the diagram pane (via the graph push)
and the text pane (via the server-side edit) with no further requests.
*/

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { readFileSync } from "node:fs";
import { createServer } from "node:net";
import { join, resolve } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { renderGraph } from "../src/diagram.js";
import { GraphClient } from "../src/graphClient.js";
import { elementCount, type Graph } from "../src/protocol.js";
import { whenOpen, wrapSocket } from "../src/socket.js";
import { TextClient } from "../src/textClient.js";

// the test runner's working directory is the frontend package root
const REPO = resolve(process.cwd(), "..");
const URI = "file:///e2e/sample.rt";

/** FIFO hand-off between push handlers and awaiting test steps. */
class Channel<T> {
  private values: T[] = [];
  private waiters: ((value: T) => void)[] = [];

  push(value: T): void {
    const waiter = this.waiters.shift();
    if (waiter) {
      waiter(value);
    } else {
      this.values.push(value);
    }
  }

  next(): Promise<T> {
    const value = this.values.shift();
    if (value !== undefined) {
      return Promise.resolve(value);
    }
    return new Promise((resolve) => this.waiters.push(resolve));
  }
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.on("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const { port } = probe.address() as { port: number };
      probe.close(() => resolve(port));
    });
  });
}

async function connectWithRetry(url: string, attempts = 50): Promise<WebSocket> {
  for (let i = 0; i < attempts; i += 1) {
    const socket = new WebSocket(url);
    try {
      await whenOpen(socket);
      return socket;
    } catch {
      socket.close();
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
  throw new Error(`server never came up at ${url}`);
}

describe("editing through both panes", () => {
  let server: ChildProcessWithoutNullStreams;
  let graphSocket: WebSocket;
  let textSocket: WebSocket;

  beforeAll(async () => {
    const [graphPort, textPort] = [await freePort(), await freePort()];
    server = spawn(
      "python3",
      [
        "-m",
        "hybridls.cli",
        "serve",
        "--host",
        "127.0.0.1",
        "--graph-port",
        String(graphPort),
        "--text-port",
        String(textPort),
      ],
      { cwd: REPO, stdio: ["ignore", "pipe", "pipe"] },
    );
    const base = `ws://127.0.0.1:${graphPort}`;
    graphSocket = await connectWithRetry(`${base}/graph`);
    textSocket = await connectWithRetry(`${base}/text`);
  });

  afterAll(() => {
    graphSocket?.close();
    textSocket?.close();
    server?.kill();
  });

  it("applies a palette operation to diagram and text in one round trip", async () => {
    const diagnosticsSeen = new Channel<number>();
    const serverEdits = new Channel<string>();
    const text = new TextClient(wrapSocket(textSocket), {
      onDiagnostics: (_uri, version) => diagnosticsSeen.push(version),
      onServerEdit: (_uri, newText) => serverEdits.push(newText),
    });
    const updates = new Channel<Graph>();
    const graph = new GraphClient(wrapSocket(graphSocket), {
      onModelUpdated: (_uri, _viewId, _revision, pushed) => updates.push(pushed),
    });

    await text.initialize();
    const source = readFileSync(join(REPO, "corpus", "clean", "ping-pong.rt"), "utf8");
    text.open(URI, source);
    await diagnosticsSeen.next();

    // the two panes of the application
    const diagramPane = document.createElement("div");
    const editorPane = document.createElement("textarea");
    document.body.append(diagramPane, editorPane);
    editorPane.value = text.buffer;

    const before = await graph.requestModel(URI, "behavior:M.Controller");
    renderGraph(before, diagramPane);
    expect(diagramPane.querySelectorAll("[data-graph-id]").length).toBe(elementCount(before));
    expect(diagramPane.textContent).not.toContain("WebState");

    const result = await graph.operation(URI, "behavior:M.Controller", {
      kind: "AddState",
      target: "sm:M.Controller.sm",
      payload: { name: "WebState" },
    });
    expect(result.accepted).toBe(true);
    expect(result.revision).toBe(before.revision + 1);

    // diagram pane: the pushed graph already contains the new state
    const pushed = await updates.next();
    expect(pushed.revision).toBe(result.revision);
    renderGraph(pushed, diagramPane);
    expect(diagramPane.querySelectorAll("[data-graph-id]").length).toBe(elementCount(pushed));
    expect(elementCount(pushed)).toBe(elementCount(before) + 1);
    const labels = [...diagramPane.querySelectorAll("g.node text")].map((t) => t.textContent);
    expect(labels).toContain("WebState");

    // text pane: the server-side edit landed without any local request
    const edited = await serverEdits.next();
    expect(edited).toContain("state WebState;");
    editorPane.value = edited;
    expect(editorPane.value).toContain("state WebState;");
    expect(text.buffer).toBe(edited);

    await text.shutdown();
    text.exit();
  });
});
