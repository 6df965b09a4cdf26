/** JSON-RPC client for the graph endpoint.

Tracks the last received graph and its revision; every operation goes out
against exactly that revision, and at most one operation is in flight at a
time (later ones queue behind it).  Server pushes update the tracked state
before any handler runs, so handlers always observe the newest graph.
*/

import type {
  Graph,
  Operation,
  OperationResult,
  PaletteItem,
  RpcMessage,
  ViewDescriptor,
} from "./protocol.js";
import type { WireSocket } from "./socket.js";

export class GraphRequestError extends Error {
  constructor(
    readonly code: number,
    message: string,
    readonly data?: unknown,
  ) {
    super(message);
    this.name = "GraphRequestError";
  }
}

export interface GraphHandlers {
  onModelUpdated?(uri: string, viewId: string, revision: number, graph: Graph): void;
  onViewStale?(uri: string, viewId: string): void;
}

interface PendingRequest {
  resolve(value: any): void;
  reject(error: Error): void;
}

export class GraphClient {
  lastGraph: Graph | null = null;
  lastRevision = 0;
  currentViewId: string | null = null;

  private nextId = 1;
  private readonly pending = new Map<number, PendingRequest>();
  private operationChain: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly socket: WireSocket,
    private readonly handlers: GraphHandlers = {},
  ) {
    socket.subscribe({
      onMessage: (data) => this.dispatch(JSON.parse(data) as RpcMessage),
    });
  }

  listViews(uri: string): Promise<ViewDescriptor[]> {
    return this.request("graph/listViews", { uri });
  }

  async requestModel(uri: string, viewId: string): Promise<Graph> {
    const graph = (await this.request("graph/requestModel", { uri, viewId })) as Graph;
    this.adopt(graph);
    return graph;
  }

  requestPalette(uri: string, viewId: string): Promise<PaletteItem[]> {
    return this.request("graph/requestPalette", { uri, viewId });
  }

  /** Sends one palette operation against the last received revision. */
  operation(uri: string, viewId: string, operation: Operation): Promise<OperationResult> {
    const run = this.operationChain.then(() =>
      this.request("graph/operation", {
        uri,
        viewId,
        operation,
        expectedRevision: this.lastRevision,
      }),
    );
    this.operationChain = run.catch(() => undefined);
    return run as Promise<OperationResult>;
  }

  /** Switches to an explicit view, or drills via a clicked element. */
  async switchView(uri: string, viewId: string, clickedElementId?: string): Promise<Graph> {
    const params: Record<string, unknown> = { uri, viewId };
    if (clickedElementId !== undefined) {
      params.clickedElementId = clickedElementId;
    }
    const graph = (await this.request("graph/switchView", params)) as Graph;
    this.adopt(graph);
    return graph;
  }

  private request(method: string, params: Record<string, unknown>): Promise<any> {
    const id = this.nextId;
    this.nextId += 1;
    const settle = new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.socket.send(JSON.stringify({ jsonrpc: "2.0", id, method, params }));
    return settle;
  }

  private adopt(graph: Graph): void {
    this.lastGraph = graph;
    this.lastRevision = graph.revision;
    this.currentViewId = graph.viewId;
  }

  private dispatch(message: RpcMessage): void {
    if (message.id !== undefined && message.method === undefined) {
      const entry = this.pending.get(message.id as number);
      if (!entry) {
        return;
      }
      this.pending.delete(message.id as number);
      if (message.error) {
        entry.reject(
          new GraphRequestError(message.error.code, message.error.message, message.error.data),
        );
      } else {
        entry.resolve(message.result);
      }
      return;
    }
    if (message.method === "graph/modelUpdated") {
      const { uri, viewId, revision, graph } = message.params;
      if (viewId === this.currentViewId || this.currentViewId === null) {
        this.adopt(graph);
      }
      this.handlers.onModelUpdated?.(uri, viewId, revision, graph);
      return;
    }
    if (message.method === "graph/viewStale") {
      this.handlers.onViewStale?.(message.params.uri, message.params.viewId);
    }
  }
}
