// Transports deliver one parsed protocol message per callback.

import type { SessionMessage } from "./protocol.js";

export interface Transport {
  send(message: object): void;
  onMessage(handler: (msg: SessionMessage) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Browser transport over the server's WebSocket bridge. */
export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private messageHandler: ((msg: SessionMessage) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private backlog: SessionMessage[] = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (event) => {
      for (const line of String(event.data).split("\n")) {
        if (!line.trim()) continue;
        const msg = JSON.parse(line) as SessionMessage;
        if (this.messageHandler) this.messageHandler(msg);
        else this.backlog.push(msg);
      }
    };
    this.ws.onclose = () => {
      if (this.closeHandler) this.closeHandler();
    };
    this.ws.onerror = () => {
      if (this.closeHandler) this.closeHandler();
    };
  }

  send(message: object): void {
    this.ws.send(JSON.stringify(message));
  }

  onMessage(handler: (msg: SessionMessage) => void): void {
    this.messageHandler = handler;
    for (const msg of this.backlog.splice(0)) handler(msg);
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}
