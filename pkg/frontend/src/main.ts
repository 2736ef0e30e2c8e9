/**
 * Page wiring: query form pinned at the top, batches stacked below in
 * arrival order, judgment toggles per sentence, "more" and export controls.
 * The session id lives in the URL fragment so a reload can re-attach.
 */

import { SearchApi } from './api';
import { saveBlob } from './download';
import { applyJudgment, clearBanner, renderBatch, showBanner } from './render';
import { SessionStore } from './state';
import { ExportFormat } from './types';

export function setupApp(root: Document = document, baseUrl = ''): SessionStore {
  const api = new SearchApi(baseUrl);
  const store = new SessionStore(api);

  const form = root.querySelector<HTMLFormElement>('#query-form')!;
  const input = root.querySelector<HTMLInputElement>('#query-input')!;
  const submit = root.querySelector<HTMLButtonElement>('#query-submit')!;
  const moreButton = root.querySelector<HTMLButtonElement>('#more-button')!;
  const formatSelect = root.querySelector<HTMLSelectElement>('#export-format')!;
  const downloadButton = root.querySelector<HTMLButtonElement>('#download-button')!;
  const batches = root.querySelector<HTMLElement>('#batches')!;
  const banner = root.querySelector<HTMLElement>('#error-banner')!;

  const syncControls = () => {
    submit.disabled = store.pending || !input.value.trim();
    moreButton.disabled = store.pending || !store.active || !!store.state?.exhausted;
    downloadButton.disabled = store.pending || !store.active;
  };

  const onJudge = (sentenceId: number, mark: 'relevant' | 'irrelevant') => {
    const judgment = store.judge(sentenceId, mark);
    applyJudgment(batches, sentenceId, judgment);
  };

  input.addEventListener('input', syncControls);

  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    if (store.pending || !input.value.trim()) {
      return;
    }
    clearBanner(banner);
    try {
      const state = await store.submitQuery(input.value);
      batches.innerHTML = '';
      renderBatch(batches, 1, state.batches[0] ?? [], onJudge);
      root.location.hash = state.sessionId;
    } catch (err) {
      showBanner(banner, `search failed: ${(err as Error).message}`);
    } finally {
      syncControls();
    }
  });

  moreButton.addEventListener('click', async () => {
    if (store.pending) {
      return;
    }
    clearBanner(banner);
    try {
      const results = await store.more();
      if (results.length > 0) {
        renderBatch(batches, store.state!.batches.length, results, onJudge);
      }
      // on a 409 the store reverted its optimistic marks; re-sync the DOM
      for (const [id, judgment] of store.state!.judgments) {
        applyJudgment(batches, id, judgment);
      }
    } catch (err) {
      showBanner(banner, `could not fetch more: ${(err as Error).message}`);
    } finally {
      syncControls();
    }
  });

  downloadButton.addEventListener('click', async () => {
    if (store.pending) {
      return;
    }
    clearBanner(banner);
    try {
      const format = formatSelect.value as ExportFormat;
      const { blob, filename } = await store.download(format);
      saveBlob(blob, filename);
    } catch (err) {
      showBanner(banner, `download failed: ${(err as Error).message}`);
    } finally {
      syncControls();
    }
  });

  const fragment = root.location.hash.slice(1);
  if (fragment) {
    store.adoptSession(fragment);
  }
  syncControls();
  return store;
}

if (typeof window !== 'undefined') {
  if (document.querySelector('#query-form')) {
    setupApp();
  } else if (document.readyState === 'loading') {
    document.addEventListener('DOMContentLoaded', () => setupApp());
  }
}
