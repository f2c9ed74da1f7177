/** Session client: frames the JSON-header-plus-binary-attachments protocol
 * over any WebSocket implementation (browser global or the ws package). */

import { EditMessage, ServerMessage } from "./protocol.js";

export interface SocketLike {
  binaryType: string;
  send(data: string): void;
  close(): void;
  addEventListener(type: "message", handler: (event: { data: unknown }) => void): void;
  addEventListener(type: "close" | "open" | "error", handler: (event: unknown) => void): void;
}

export interface ClientEvents {
  onMessage: (message: ServerMessage, frames: ArrayBuffer[]) => void;
  onClose?: () => void;
}

export class SessionClient {
  private expected = 0;
  private header: ServerMessage | null = null;
  private frames: ArrayBuffer[] = [];

  constructor(private socket: SocketLike, private events: ClientEvents) {
    socket.binaryType = "arraybuffer";
    socket.addEventListener("message", (event) => this.handle(event.data));
    socket.addEventListener("close", () => this.events.onClose?.());
  }

  send(message: EditMessage | { type: "full_sync" }): void {
    this.socket.send(JSON.stringify(message));
  }

  close(): void {
    this.socket.close();
  }

  private handle(data: unknown): void {
    if (typeof data === "string") {
      const message = JSON.parse(data) as ServerMessage;
      if (message.type === "update" && message.attachments.length > 0) {
        this.header = message;
        this.expected = message.attachments.length;
        this.frames = [];
        return;
      }
      this.events.onMessage(message, []);
      return;
    }
    const buffer = toArrayBuffer(data);
    if (this.header === null) return; // stray binary frame
    this.frames.push(buffer);
    if (this.frames.length === this.expected) {
      const header = this.header;
      const frames = this.frames;
      this.header = null;
      this.frames = [];
      this.events.onMessage(header, frames);
    }
  }
}

function toArrayBuffer(data: unknown): ArrayBuffer {
  if (data instanceof ArrayBuffer) return data;
  if (ArrayBuffer.isView(data)) {
    const view = data as ArrayBufferView;
    return view.buffer.slice(view.byteOffset, view.byteOffset + view.byteLength) as ArrayBuffer;
  }
  throw new Error("unsupported binary frame type");
}
