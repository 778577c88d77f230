import { StreamMessage } from "./types";

export interface EventSourceLike {
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamCallbacks {
  onMessage: (message: StreamMessage) => void;
  onStatus?: (connected: boolean) => void;
}

/**
 * Server-sent-events subscription with automatic reconnect.
 *
 * Every (re)connection starts with the service's `init` message, so the
 * consumer resyncs to the full server state instead of patching gaps.
 */
export class SessionStream {
  private source: EventSourceLike | null = null;
  private closed = false;
  private retryMs = 1000;

  constructor(
    private url: string,
    private callbacks: StreamCallbacks,
    private factory: EventSourceFactory = (u) =>
      new EventSource(u) as unknown as EventSourceLike,
    private scheduler: (fn: () => void, ms: number) => void = (fn, ms) =>
      void setTimeout(fn, ms),
  ) {
    this.open();
  }

  private open(): void {
    if (this.closed) return;
    this.source = this.factory(this.url);
    this.source.onmessage = (ev) => {
      this.retryMs = 1000;
      this.callbacks.onStatus?.(true);
      this.callbacks.onMessage(JSON.parse(ev.data) as StreamMessage);
    };
    this.source.onerror = () => {
      this.callbacks.onStatus?.(false);
      this.source?.close();
      this.source = null;
      if (!this.closed) {
        this.scheduler(() => this.open(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 10_000);
      }
    };
  }

  close(): void {
    this.closed = true;
    this.source?.close();
    this.source = null;
  }
}
