/** View state for the assistant: one selected policy, one conversation. */

import type { AnswerPayload, PolicyDetail, PolicySummary, SummaryEntry } from "./api.js";

export interface Turn {
  question: string;
  answer: AnswerPayload;
}

export interface ViewState {
  policies: PolicySummary[];
  policy: PolicyDetail | null;
  question: string;
  k: number;
  order: "rank" | "document";
  answer: AnswerPayload | null;
  /** Past (question, answer) turns; append-only within a session. */
  history: Turn[];
  error: string | null;
  notice: string | null;
  busy: boolean;
}

export function initialState(): ViewState {
  return {
    policies: [],
    policy: null,
    question: "",
    k: 5,
    order: "rank",
    answer: null,
    history: [],
    error: null,
    notice: null,
    busy: false,
  };
}

/** segment_index -> summary entry for the rendered highlight set. */
export function highlightSet(answer: AnswerPayload | null): Map<number, SummaryEntry> {
  const map = new Map<number, SummaryEntry>();
  if (answer) {
    for (const entry of answer.summary) map.set(entry.segment_index, entry);
  }
  return map;
}

/** The paraphrase that won the top-ranked segment (starred in the panel). */
export function starredParaphrase(answer: AnswerPayload | null): string | null {
  if (!answer || answer.summary.length === 0) return null;
  let top = answer.summary[0];
  for (const entry of answer.summary) {
    if (entry.rank < top.rank) top = entry;
  }
  return top.winning_paraphrase;
}

export function recordTurn(state: ViewState, question: string, answer: AnswerPayload): void {
  state.answer = answer;
  state.history.push({ question, answer });
  state.error = null;
  state.notice = null;
}
