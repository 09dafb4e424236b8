/** Event wiring: one in-flight query at a time, append-only history. */

import { ApiClient, ApiError } from "./api.js";
import { render } from "./render.js";
import { initialState, recordTurn, type ViewState } from "./state.js";

export class App {
  readonly state: ViewState = initialState();
  private pending: AbortController | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient = new ApiClient(),
  ) {
    this.root.addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.root.querySelector<HTMLInputElement>(".question-input");
      if (input) this.state.question = input.value;
      void this.ask();
    });
    this.root.addEventListener("change", (event) => {
      const target = event.target as HTMLElement;
      if (target.classList.contains("policy-select")) {
        void this.selectPolicy((target as HTMLSelectElement).value);
      } else if (target.classList.contains("k-slider")) {
        void this.adjustK(Number((target as HTMLInputElement).value));
      } else if (target.classList.contains("order-toggle")) {
        void this.toggleOrder((target as HTMLInputElement).checked);
      }
    });
    this.root.addEventListener("input", (event) => {
      const target = event.target as HTMLElement;
      if (target.classList.contains("question-input")) {
        // keep state in sync without re-rendering (the input owns focus)
        this.state.question = (target as HTMLInputElement).value;
      }
    });
  }

  async start(): Promise<void> {
    try {
      this.state.policies = await this.client.listPolicies();
    } catch (err) {
      this.state.error = this.describe(err);
    }
    this.render();
  }

  async selectPolicy(id: string): Promise<void> {
    if (!id) {
      this.state.policy = null;
      this.state.answer = null;
      this.render();
      return;
    }
    try {
      this.state.policy = await this.client.getPolicy(id);
      this.state.answer = null;
      this.state.error = null;
    } catch (err) {
      this.state.error = this.describe(err);
    }
    this.render();
  }

  /** Ask the current question; an empty question never leaves the browser. */
  async ask(): Promise<void> {
    if (!this.state.policy) {
      this.state.notice = "Select a policy first.";
      this.render();
      return;
    }
    const question = this.state.question.trim();
    if (!question) {
      this.state.notice = "Type a question first.";
      this.render();
      return;
    }
    this.pending?.abort();
    const controller = new AbortController();
    this.pending = controller;
    this.state.busy = true;
    this.state.notice = null;
    this.render();
    try {
      const answer = await this.client.ask(
        this.state.policy.id,
        question,
        this.state.k,
        this.state.order,
        controller.signal,
      );
      recordTurn(this.state, question, answer);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        return; // superseded by a newer question
      }
      this.state.error = this.describe(err);
    } finally {
      if (this.pending === controller) {
        this.pending = null;
        this.state.busy = false;
      }
    }
    this.render();
  }

  /** Re-query with a new summary budget. */
  async adjustK(k: number): Promise<void> {
    this.state.k = k;
    if (this.state.answer) {
      await this.ask();
    } else {
      this.render();
    }
  }

  async toggleOrder(documentOrder: boolean): Promise<void> {
    this.state.order = documentOrder ? "document" : "rank";
    if (this.state.answer) {
      await this.ask();
    } else {
      this.render();
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) {
      if (err.status === 502) return `Backend unavailable (502): ${err.message}`;
      return `Request failed (${err.status}): ${err.message}`;
    }
    return `Request failed: ${String(err)}`;
  }

  render(): void {
    render(this.root, this.state);
    const input = this.root.querySelector<HTMLInputElement>(".question-input");
    if (input) input.value = this.state.question;
  }
}
