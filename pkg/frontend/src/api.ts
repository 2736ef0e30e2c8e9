/** Thin client over the search service's JSON API. */

import {
  ApiError,
  CreateSessionResponse,
  ExportFormat,
  FeedbackResponse,
  MoreResponse,
} from './types';

async function throwApiError(resp: Response): Promise<never> {
  let code = 'http_error';
  let message = `request failed with status ${resp.status}`;
  try {
    const body = await resp.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(resp.status, code, message);
}

export class SearchApi {
  constructor(private baseUrl: string = '') {}

  private async postJson<T>(path: string, payload: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      await throwApiError(resp);
    }
    return (await resp.json()) as T;
  }

  createSession(query: string, k?: number, mode?: string): Promise<CreateSessionResponse> {
    const payload: Record<string, unknown> = { query };
    if (k !== undefined) payload['k'] = k;
    if (mode !== undefined) payload['mode'] = mode;
    return this.postJson('/api/sessions', payload);
  }

  sendFeedback(
    sessionId: string,
    judgments: { sentence_id: number; relevant: boolean }[]
  ): Promise<FeedbackResponse> {
    return this.postJson(`/api/sessions/${sessionId}/feedback`, { judgments });
  }

  more(sessionId: string): Promise<MoreResponse> {
    return this.postJson(`/api/sessions/${sessionId}/more`, {});
  }

  exportUrl(sessionId: string, format: ExportFormat): string {
    return `${this.baseUrl}/api/sessions/${sessionId}/export?format=${format}`;
  }

  async fetchExport(
    sessionId: string,
    format: ExportFormat
  ): Promise<{ blob: Blob; filename: string }> {
    const resp = await fetch(this.exportUrl(sessionId, format));
    if (!resp.ok) {
      await throwApiError(resp);
    }
    const blob = await resp.blob();
    const filename = filenameFromContentDisposition(
      resp.headers.get('content-disposition'),
      `session-${sessionId}.${format}`
    );
    return { blob, filename };
  }
}

/** Pull the attachment filename out of a Content-Disposition header. */
export function filenameFromContentDisposition(
  header: string | null,
  fallback: string
): string {
  if (!header) {
    return fallback;
  }
  const encoded = header.match(/filename\*=UTF-8''([^;]+)/i);
  if (encoded && encoded[1]) {
    try {
      return decodeURIComponent(encoded[1]);
    } catch {
      // fall through to the plain form
    }
  }
  const plain = header.match(/filename=(?:"([^"]*)"|([^;\s]+))/i);
  if (plain) {
    return plain[1] ?? plain[2] ?? fallback;
  }
  return fallback;
}
