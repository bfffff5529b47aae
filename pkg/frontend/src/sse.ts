/** Event-stream subscription with reconnect, exponential backoff, and a
 * resync hook. The dashboard holds no authoritative state: on every
 * (re)connect `onConnected` re-fetches prompts and status, because events
 * published while disconnected are not replayed. */

export interface EventHandlers {
  /** Called per server event with the event kind and parsed JSON payload. */
  onEvent: (kind: string, data: unknown) => void;
  /** Called after each successful (re)connect; do the resync here. */
  onConnected: () => void;
  /** Called when the stream drops; the UI shows a degraded-state banner. */
  onDisconnected: () => void;
}

export interface SseOptions {
  kinds?: string[];
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  /** Injectable for tests. */
  eventSourceFactory?: (url: string) => EventSource;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

export const EVENT_KINDS = [
  "prompt-created",
  "prompt-resolved",
  "notice",
  "decision",
  "status-changed",
];

export function connectEvents(url: string, handlers: EventHandlers, options: SseOptions = {}): () => void {
  const kinds = options.kinds ?? EVENT_KINDS;
  const initial = options.initialBackoffMs ?? 1000;
  const max = options.maxBackoffMs ?? 30000;
  const makeSource = options.eventSourceFactory ?? ((u: string) => new EventSource(u));
  const schedule = options.setTimeoutFn ?? ((fn: () => void, ms: number) => setTimeout(fn, ms));

  let backoff = initial;
  let source: EventSource | null = null;
  let closed = false;

  const start = () => {
    if (closed) return;
    source = makeSource(url);
    source.onopen = () => {
      backoff = initial;
      handlers.onConnected();
    };
    for (const kind of kinds) {
      source.addEventListener(kind, (ev: MessageEvent) => {
        let data: unknown = null;
        try {
          data = JSON.parse(ev.data);
        } catch {
          return; // malformed frame: ignore, resync covers us
        }
        handlers.onEvent(kind, data);
      });
    }
    source.onerror = () => {
      source?.close();
      source = null;
      handlers.onDisconnected();
      schedule(start, backoff);
      backoff = Math.min(backoff * 2, max);
    };
  };

  start();
  return () => {
    closed = true;
    source?.close();
  };
}
