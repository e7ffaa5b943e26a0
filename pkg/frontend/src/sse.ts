// SSE over fetch streaming: works in the browser and in node tests, and
// lets us send the Authorization header (EventSource cannot).

import type { TraceEvent } from './types.js';

export class SseParser {
  private buffer = '';
  private current: { id?: number; event?: string; data?: string } = {};

  /** Feed a text chunk; returns the completed events it contained. */
  feed(chunk: string): TraceEvent[] {
    this.buffer += chunk;
    const events: TraceEvent[] = [];
    let newline;
    while ((newline = this.buffer.indexOf('\n')) >= 0) {
      const line = this.buffer.slice(0, newline).replace(/\r$/, '');
      this.buffer = this.buffer.slice(newline + 1);
      if (line === '') {
        const done = this.flush();
        if (done) events.push(done);
        continue;
      }
      if (line.startsWith(':')) continue; // heartbeat comment
      if (line.startsWith('id:')) this.current.id = Number(line.slice(3).trim());
      else if (line.startsWith('event:')) this.current.event = line.slice(6).trim();
      else if (line.startsWith('data:')) {
        this.current.data = (this.current.data ?? '') + line.slice(5).trim();
      }
    }
    return events;
  }

  private flush(): TraceEvent | null {
    const { id, event, data } = this.current;
    this.current = {};
    if (event === undefined || data === undefined) return null;
    return { id: id ?? -1, event, data: JSON.parse(data) };
  }
}

export interface StreamHandle {
  close(): void;
  done: Promise<void>;
}

/** Subscribe to an instance trace; onEvent fires per SSE event in order. */
export function streamTrace(
  url: string,
  headers: Record<string, string>,
  onEvent: (event: TraceEvent) => void,
  lastEventId?: number,
  fetchImpl: typeof fetch = fetch,
): StreamHandle {
  const controller = new AbortController();
  const requestHeaders: Record<string, string> = {
    ...headers,
    Accept: 'text/event-stream',
  };
  if (lastEventId !== undefined) {
    requestHeaders['Last-Event-ID'] = String(lastEventId);
  }
  const done = (async () => {
    const response = await fetchImpl(url, {
      headers: requestHeaders,
      signal: controller.signal,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`trace stream failed: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    let terminal = false;
    try {
      for (;;) {
        const { done: finished, value } = await reader.read();
        if (finished) break;
        for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
          onEvent(event);
          if (event.event === 'completed') terminal = true;
        }
        if (terminal) break;
      }
    } finally {
      reader.cancel().catch(() => undefined);
    }
  })();
  return {
    close: () => controller.abort(),
    done: done.catch((err) => {
      if ((err as Error).name !== 'AbortError') throw err;
    }),
  };
}
