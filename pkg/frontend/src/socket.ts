/**
 * WebSocket transport to the review service's /ws endpoint:
 * connect / disconnect, raw frame callbacks, auto-reconnect with
 * exponential backoff (1s -> 30s max).
 */

export type ConnectionState = "connected" | "disconnected" | "reconnecting";

export interface ReviewSocketOptions {
  url?: string;
  onFrame: (raw: string) => void;
  onStateChange: (state: ConnectionState) => void;
}

const BACKOFF_BASE_MS = 1000;
const BACKOFF_MAX_MS = 30000;

export class ReviewSocket {
  private ws: WebSocket | null = null;
  private options: ReviewSocketOptions;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectAttempt = 0;
  private shouldReconnect = false;

  constructor(options: ReviewSocketOptions) {
    this.options = options;
  }

  connect(): void {
    this.shouldReconnect = true;
    this.createSocket();
  }

  send(frame: string): void {
    if (this.ws?.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
    } else {
      console.warn("not connected; dropping frame");
    }
  }

  disconnect(): void {
    this.shouldReconnect = false;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.ws?.close();
    this.ws = null;
    this.options.onStateChange("disconnected");
  }

  private url(): string {
    if (this.options.url) {
      return this.options.url;
    }
    const protocol = location.protocol === "https:" ? "wss:" : "ws:";
    return `${protocol}//${location.host}/ws`;
  }

  private createSocket(): void {
    this.ws = new WebSocket(this.url());
    this.ws.onopen = () => {
      this.reconnectAttempt = 0;
      this.options.onStateChange("connected");
    };
    this.ws.onmessage = (event) => {
      this.options.onFrame(String(event.data));
    };
    this.ws.onclose = () => {
      this.ws = null;
      if (this.shouldReconnect) {
        this.options.onStateChange("reconnecting");
        const delay = Math.min(
          BACKOFF_BASE_MS * 2 ** this.reconnectAttempt,
          BACKOFF_MAX_MS,
        );
        this.reconnectAttempt++;
        this.reconnectTimer = setTimeout(() => {
          this.reconnectTimer = null;
          this.createSocket();
        }, delay);
      } else {
        this.options.onStateChange("disconnected");
      }
    };
  }
}
