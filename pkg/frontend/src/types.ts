/** Shared types for the feedback-search client. */

export interface ApiResult {
  id: number;
  text: string;
  score: number;
  rank: number;
}

export interface CreateSessionResponse {
  session_id: string;
  results: ApiResult[];
}

export interface MoreResponse {
  results: ApiResult[];
}

export interface FeedbackResponse {
  relevant_count: number;
  irrelevant_count: number;
}

export type Judgment = 'relevant' | 'irrelevant' | 'unjudged';

export interface UiSessionState {
  sessionId: string;
  queryText: string;
  batches: ApiResult[][];
  judgments: Map<number, Judgment>;
  exhausted: boolean;
}

export type ExportFormat = 'txt' | 'csv' | 'json';

export const EXPORT_FORMATS: ExportFormat[] = ['txt', 'csv', 'json'];

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string
  ) {
    super(message);
  }
}
