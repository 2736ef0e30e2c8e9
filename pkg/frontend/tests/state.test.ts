import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { SearchApi } from '../src/api';
import { SessionStore } from '../src/state';
import { FakeService } from './fakeService';

const SENTENCES = Array.from({ length: 8 }, (_, i) => ({
  id: i,
  text: `sentence number ${i}`,
}));

let service: FakeService;
let store: SessionStore;

beforeEach(() => {
  service = new FakeService(SENTENCES, 3);
  vi.stubGlobal('fetch', service.fetch);
  store = new SessionStore(new SearchApi('http://svc'));
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('submitQuery', () => {
  it('creates a session and records the first batch', async () => {
    const state = await store.submitQuery("ceese' he'ih");
    expect(state.sessionId).toBe(service.sessionId);
    expect(state.batches).toHaveLength(1);
    expect(state.batches[0]!.map((r) => r.id)).toEqual([0, 1, 2]);
    expect([...state.judgments.values()]).toEqual(['unjudged', 'unjudged', 'unjudged']);
  });

  it('rejects an empty query without calling the server', async () => {
    await expect(store.submitQuery('   ')).rejects.toThrow('empty');
    expect(service.requests).toHaveLength(0);
  });
});

describe('judge', () => {
  it('updates optimistically and queues the delta', async () => {
    await store.submitQuery('q');
    store.judge(0, 'relevant');
    store.judge(1, 'irrelevant');
    expect(store.state!.judgments.get(0)).toBe('relevant');
    expect(store.pendingJudgments()).toEqual([
      { sentence_id: 0, relevant: true },
      { sentence_id: 1, relevant: false },
    ]);
    // nothing flushed yet
    expect(service.requests).toEqual(['/api/sessions']);
  });

  it('flipping a mark keeps one queued judgment per sentence', async () => {
    await store.submitQuery('q');
    store.judge(0, 'relevant');
    store.judge(0, 'irrelevant');
    expect(store.pendingJudgments()).toEqual([{ sentence_id: 0, relevant: false }]);
  });

  it('refuses ids that were never rendered', async () => {
    await store.submitQuery('q');
    expect(() => store.judge(999, 'relevant')).toThrow('never rendered');
  });
});

describe('more', () => {
  it('flushes the delta then appends a non-overlapping batch', async () => {
    await store.submitQuery('q');
    store.judge(0, 'relevant');
    const batch = await store.more();
    expect(service.requests).toEqual([
      '/api/sessions',
      `/api/sessions/${service.sessionId}/feedback`,
      `/api/sessions/${service.sessionId}/more`,
    ]);
    expect(batch.map((r) => r.id)).toEqual([3, 4, 5]);
    const all = store.state!.batches.flat().map((r) => r.id);
    expect(new Set(all).size).toBe(all.length);
    expect(store.pendingJudgments()).toEqual([]);
  });

  it('skips the feedback request when nothing changed', async () => {
    await store.submitQuery('q');
    await store.more();
    expect(service.requests).toEqual([
      '/api/sessions',
      `/api/sessions/${service.sessionId}/more`,
    ]);
  });

  it('sends exactly the delta since the previous flush', async () => {
    await store.submitQuery('q');
    store.judge(0, 'relevant');
    await store.more();
    store.judge(3, 'irrelevant');
    await store.more();
    expect(service.relevant.has(0)).toBe(true);
    expect(service.irrelevant.has(3)).toBe(true);
    expect(service.irrelevant.has(0)).toBe(false);
  });

  it('marks the session exhausted on an empty batch', async () => {
    await store.submitQuery('q');
    await store.more(); // ids 3..5
    await store.more(); // ids 6..7
    const empty = await store.more();
    expect(empty).toEqual([]);
    expect(store.state!.exhausted).toBe(true);
    const requestsBefore = service.requests.length;
    await store.more(); // exhausted: no request issued
    expect(service.requests.length).toBe(requestsBefore);
  });

  it('reverts optimistic marks when the server answers 409', async () => {
    await store.submitQuery('q');
    store.judge(1, 'relevant');
    service.shown.delete(1); // make the server forget it showed sentence 1
    await expect(store.more()).rejects.toMatchObject({ status: 409 });
    expect(store.state!.judgments.get(1)).toBe('unjudged');
    expect(store.pendingJudgments()).toEqual([]);
  });

  it('blocks concurrent mutations', async () => {
    await store.submitQuery('q');
    const first = store.more();
    await expect(store.more()).rejects.toThrow('in flight');
    await first;
  });
});

describe('download', () => {
  it('flushes judgments then returns the export blob', async () => {
    await store.submitQuery('q');
    store.judge(2, 'relevant');
    store.judge(0, 'relevant');
    const { blob, filename } = await store.download('txt');
    expect(filename).toBe(`session-${service.sessionId}.txt`);
    expect(await blob.text()).toBe('sentence number 2\nsentence number 0\n');
  });

  it('judged ids stay a subset of ids received from the server', async () => {
    await store.submitQuery('q');
    store.judge(0, 'relevant');
    await store.more();
    store.judge(4, 'irrelevant');
    await store.download('txt');
    const received = new Set(store.state!.batches.flat().map((r) => r.id));
    for (const id of [...service.relevant, ...service.irrelevant]) {
      expect(received.has(id)).toBe(true);
    }
  });
});
