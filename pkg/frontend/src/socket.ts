/** Transport facade over WebSocket-like objects.
 *
 * Browser WebSockets and the Node ``ws`` package share the EventTarget
 * surface used here, so clients and tests run on the same code path.
 */

export interface SocketHandlers {
  onMessage(data: string): void;
  onClose?(): void;
  onError?(error: unknown): void;
}

export interface WireSocket {
  send(data: string): void;
  close(): void;
  subscribe(handlers: SocketHandlers): void;
}

interface EventSocket {
  binaryType: string;
  readyState: number;
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

const OPEN = 1;

function decodeData(data: unknown): string {
  if (typeof data === "string") {
    return data;
  }
  if (data instanceof ArrayBuffer) {
    return new TextDecoder().decode(data);
  }
  // Node Buffer / typed array
  return new TextDecoder().decode(data as Uint8Array);
}

export function wrapSocket(raw: EventSocket): WireSocket {
  raw.binaryType = "arraybuffer";
  return {
    send: (data) => raw.send(data),
    close: () => raw.close(),
    subscribe: (handlers) => {
      raw.addEventListener("message", (event) => handlers.onMessage(decodeData(event.data)));
      raw.addEventListener("close", () => handlers.onClose?.());
      raw.addEventListener("error", (event) => handlers.onError?.(event));
    },
  };
}

/** Resolves once the connection is open, rejects on the first error. */
export function whenOpen(raw: EventSocket): Promise<void> {
  if (raw.readyState === OPEN) {
    return Promise.resolve();
  }
  return new Promise((resolve, reject) => {
    let settled = false;
    raw.addEventListener("open", () => {
      if (!settled) {
        settled = true;
        resolve();
      }
    });
    raw.addEventListener("error", () => {
      if (!settled) {
        settled = true;
        reject(new Error("connection failed"));
      }
    });
  });
}
