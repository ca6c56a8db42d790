/** Typed client for the chat backend. The UI never computes domain data;
 *  everything it shows comes through these calls. */

import type { MapPoint, MessageResponse, SessionResponse, SymptomItem } from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

declare global {
  interface Window {
    COVASSIST_BASE_URL?: string;
  }
}

export function defaultBaseUrl(): string {
  return (typeof window !== 'undefined' && window.COVASSIST_BASE_URL) || '';
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    throw new ApiError(response.status, `${init?.method ?? 'GET'} ${url} -> ${response.status}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = defaultBaseUrl()) {}

  createSession(): Promise<SessionResponse> {
    return request<SessionResponse>(`${this.baseUrl}/api/session`, { method: 'POST' });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return request<MessageResponse>(`${this.baseUrl}/api/session/${sessionId}/message`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    });
  }

  getMap(): Promise<MapPoint[]> {
    return request<MapPoint[]>(`${this.baseUrl}/api/map`);
  }

  getSymptoms(): Promise<SymptomItem[]> {
    return request<SymptomItem[]>(`${this.baseUrl}/api/symptoms`);
  }
}
