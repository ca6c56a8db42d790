/** Shared mocked-API plumbing for the UI tests. */

import { vi } from 'vitest';
import type { MapPoint, MessageResponse } from '../src/types.js';

export const MAP_POINTS: MapPoint[] = [
  { country: 'Tunisia', lat: 34, lon: 9, cases: 100, deaths: 3, recovered: 50 },
  { country: 'France', lat: 46.2, lon: 2.2, cases: 513034, deaths: 31661, recovered: 94289 },
  { country: 'Italy', lat: 42.8, lon: 12.8, cases: 308104, deaths: 35818, recovered: 222716 },
];

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export interface MockRoutes {
  session?: () => Response;
  message?: (text: string) => Response;
  map?: () => Response;
}

/** Install a fetch stub routing the API endpoints; returns the spy. */
export function mockFetch(routes: MockRoutes) {
  const spy = vi.fn(async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    if (url.endsWith('/api/session')) {
      return (routes.session ?? (() => jsonResponse({ session_id: 's1', greeting: 'Hello! I am a chatbot.' })))();
    }
    if (url.includes('/message')) {
      const text = init?.body ? (JSON.parse(String(init.body)) as { text: string }).text : '';
      return (routes.message ?? (() => jsonResponse(botText('ok'))))(text);
    }
    if (url.endsWith('/api/map')) {
      return (routes.map ?? (() => jsonResponse(MAP_POINTS)))();
    }
    return jsonResponse({ detail: 'not found' }, 404);
  });
  vi.stubGlobal('fetch', spy);
  return spy;
}

export function botText(reply: string, extra: Partial<MessageResponse> = {}): MessageResponse {
  return { reply, attachment: null, quick_replies: [], state: 'Discovery', ...extra };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
