/** DOM rendering for query batches and judgment toggles. */

import { ApiResult, Judgment } from './types';

export type JudgeHandler = (sentenceId: number, mark: 'relevant' | 'irrelevant') => void;

export function renderBatch(
  container: HTMLElement,
  batchNumber: number,
  results: ApiResult[],
  onJudge: JudgeHandler
): HTMLElement {
  const section = document.createElement('section');
  section.className = 'batch';
  section.dataset['batch'] = String(batchNumber);

  const heading = document.createElement('h3');
  heading.textContent = `Batch ${batchNumber}`;
  section.appendChild(heading);

  const list = document.createElement('ol');
  for (const result of results) {
    const item = document.createElement('li');
    item.dataset['sentenceId'] = String(result.id);
    item.dataset['judgment'] = 'unjudged';

    const text = document.createElement('span');
    text.className = 'sentence-text';
    text.textContent = result.text;
    item.appendChild(text);

    const score = document.createElement('span');
    score.className = 'score';
    score.textContent = result.score.toFixed(3);
    item.appendChild(score);

    for (const mark of ['relevant', 'irrelevant'] as const) {
      const button = document.createElement('button');
      button.type = 'button';
      button.className = `judge ${mark}`;
      button.textContent = mark === 'relevant' ? 'relevant' : 'not relevant';
      button.addEventListener('click', () => onJudge(result.id, mark));
      item.appendChild(button);
    }
    list.appendChild(item);
  }
  section.appendChild(list);
  container.appendChild(section);
  return section;
}

/** Reflect a judgment on the rendered item (highlight + data attribute). */
export function applyJudgment(
  container: HTMLElement,
  sentenceId: number,
  judgment: Judgment
): void {
  const item = container.querySelector<HTMLElement>(
    `li[data-sentence-id="${sentenceId}"]`
  );
  if (item) {
    item.dataset['judgment'] = judgment;
  }
}

export function showBanner(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.hidden = false;
}

export function clearBanner(banner: HTMLElement): void {
  banner.textContent = '';
  banner.hidden = true;
}
