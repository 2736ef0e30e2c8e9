/**
 * Session state machine for the feedback loop.
 *
 * Judgments update the UI immediately but are flushed to the server lazily:
 * the accumulated delta since the last flush is sent right before a "more"
 * request or an export download. At most one mutating request is in flight
 * at a time; conflicting actions are rejected while one is pending.
 */

import { SearchApi } from './api';
import { ApiError, ApiResult, ExportFormat, Judgment, UiSessionState } from './types';

export class SessionStore {
  state: UiSessionState | null = null;
  pending = false;

  /** Judgments changed since the last flush, in click order. */
  private dirty = new Map<number, Judgment>();
  private seenIds = new Set<number>();

  constructor(private api: SearchApi) {}

  get active(): boolean {
    return this.state !== null;
  }

  /** Start a fresh session; replaces any previous one. */
  async submitQuery(query: string, k?: number, mode?: string): Promise<UiSessionState> {
    if (!query.trim()) {
      throw new Error('query must not be empty');
    }
    if (this.pending) {
      throw new Error('another request is in flight');
    }
    this.pending = true;
    try {
      const resp = await this.api.createSession(query, k, mode);
      this.seenIds = new Set(resp.results.map((r) => r.id));
      this.dirty = new Map();
      this.state = {
        sessionId: resp.session_id,
        queryText: query,
        batches: [resp.results],
        judgments: new Map(resp.results.map((r) => [r.id, 'unjudged' as Judgment])),
        exhausted: resp.results.length === 0,
      };
      return this.state;
    } finally {
      this.pending = false;
    }
  }

  /** Attach to an existing server-side session (page reload with #session id). */
  adoptSession(sessionId: string): void {
    this.state = {
      sessionId,
      queryText: '',
      batches: [],
      judgments: new Map(),
      exhausted: false,
    };
    this.seenIds = new Set();
    this.dirty = new Map();
  }

  /**
   * Mark a sentence optimistically. Clicking the opposite mark flips it;
   * the server has no "unjudge", so a mark can only be replaced.
   */
  judge(sentenceId: number, mark: 'relevant' | 'irrelevant'): Judgment {
    if (!this.state) {
      throw new Error('no active session');
    }
    if (!this.seenIds.has(sentenceId)) {
      throw new Error(`sentence ${sentenceId} was never rendered`);
    }
    if (this.state.judgments.get(sentenceId) !== mark) {
      this.state.judgments.set(sentenceId, mark);
      this.dirty.set(sentenceId, mark);
    }
    return mark;
  }

  /** The delta that would be sent on the next flush (unjudged entries are kept back). */
  pendingJudgments(): { sentence_id: number; relevant: boolean }[] {
    const out: { sentence_id: number; relevant: boolean }[] = [];
    for (const [id, judgment] of this.dirty) {
      if (judgment !== 'unjudged') {
        out.push({ sentence_id: id, relevant: judgment === 'relevant' });
      }
    }
    return out;
  }

  private async flushJudgments(): Promise<void> {
    const delta = this.pendingJudgments();
    if (!this.state || delta.length === 0) {
      this.dirty = new Map();
      return;
    }
    try {
      await this.api.sendFeedback(this.state.sessionId, delta);
      this.dirty = new Map();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // server refused: revert every optimistic mark from this flush
        for (const id of this.dirty.keys()) {
          this.state.judgments.set(id, 'unjudged');
        }
        this.dirty = new Map();
      }
      throw err;
    }
  }

  /** Flush judgments, then append the next batch. */
  async more(): Promise<ApiResult[]> {
    if (!this.state) {
      throw new Error('no active session');
    }
    if (this.pending) {
      throw new Error('another request is in flight');
    }
    if (this.state.exhausted) {
      return [];
    }
    this.pending = true;
    try {
      await this.flushJudgments();
      const resp = await this.api.more(this.state.sessionId);
      for (const r of resp.results) {
        if (this.seenIds.has(r.id)) {
          throw new Error(`server repeated sentence ${r.id}`);
        }
        this.seenIds.add(r.id);
        this.state.judgments.set(r.id, 'unjudged');
      }
      this.state.batches.push(resp.results);
      if (resp.results.length === 0) {
        this.state.exhausted = true;
      }
      return resp.results;
    } finally {
      this.pending = false;
    }
  }

  /** Flush judgments, then fetch the export document. */
  async download(format: ExportFormat): Promise<{ blob: Blob; filename: string }> {
    if (!this.state) {
      throw new Error('no active session');
    }
    if (this.pending) {
      throw new Error('another request is in flight');
    }
    this.pending = true;
    try {
      await this.flushJudgments();
      return await this.api.fetchExport(this.state.sessionId, format);
    } finally {
      this.pending = false;
    }
  }
}
