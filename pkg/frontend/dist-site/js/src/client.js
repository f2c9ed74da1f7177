/** Session client: frames the JSON-header-plus-binary-attachments protocol
 * over any WebSocket implementation (browser global or the ws package). */
export class SessionClient {
    socket;
    events;
    expected = 0;
    header = null;
    frames = [];
    constructor(socket, events) {
        this.socket = socket;
        this.events = events;
        socket.binaryType = "arraybuffer";
        socket.addEventListener("message", (event) => this.handle(event.data));
        socket.addEventListener("close", () => this.events.onClose?.());
    }
    send(message) {
        this.socket.send(JSON.stringify(message));
    }
    close() {
        this.socket.close();
    }
    handle(data) {
        if (typeof data === "string") {
            const message = JSON.parse(data);
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
        if (this.header === null)
            return; // stray binary frame
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
function toArrayBuffer(data) {
    if (data instanceof ArrayBuffer)
        return data;
    if (ArrayBuffer.isView(data)) {
        const view = data;
        return view.buffer.slice(view.byteOffset, view.byteOffset + view.byteLength);
    }
    throw new Error("unsupported binary frame type");
}
