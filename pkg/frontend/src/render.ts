/** DOM rendering. The policy is always shown in document order; ranking is
 * conveyed through badges on the highlighted segments, never by reordering
 * or editing segment text. */

import { highlightSet, starredParaphrase, type ViewState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Wrap the first occurrence of the winning span inside the segment text. */
function segmentBody(text: string, spanText: string | undefined): HTMLElement {
  const body = el("div", "segment-text");
  if (!spanText) {
    body.textContent = text;
    return body;
  }
  const lower = text.toLowerCase();
  const at = lower.indexOf(spanText.toLowerCase());
  if (at < 0) {
    body.textContent = text;
    return body;
  }
  body.append(document.createTextNode(text.slice(0, at)));
  const em = el("em", "answer-span", text.slice(at, at + spanText.length));
  body.append(em);
  body.append(document.createTextNode(text.slice(at + spanText.length)));
  return body;
}

export function renderPolicy(state: ViewState): HTMLElement {
  const container = el("section", "policy");
  if (!state.policy) {
    container.append(el("p", "placeholder", "Select a policy to begin."));
    return container;
  }
  const highlights = highlightSet(state.answer);
  state.policy.segments.forEach((text, index) => {
    const entry = highlights.get(index);
    const seg = el("article", entry ? "segment highlight" : "segment");
    seg.dataset.index = String(index);
    if (entry) {
      const badge = el("span", "badge", `#${entry.rank}`);
      badge.title = `score ${entry.score.toFixed(4)} via ${entry.winning_method}`;
      seg.append(badge);
      seg.append(segmentBody(text, entry.best_span?.text));
    } else {
      seg.append(segmentBody(text, undefined));
    }
    container.append(seg);
  });
  return container;
}

export function renderParaphrases(state: ViewState): HTMLElement {
  const panel = el("aside", "paraphrases");
  panel.append(el("h2", undefined, "Paraphrases"));
  if (!state.answer) {
    panel.append(el("p", "placeholder", "Ask a question to see its expansions."));
    return panel;
  }
  const starred = starredParaphrase(state.answer);
  const list = el("ul");
  for (const p of state.answer.paraphrases) {
    const item = el("li", "paraphrase");
    if (p.text === starred) {
      item.classList.add("starred");
      item.append(el("span", "star", "★"));
    }
    item.append(el("span", "method-tag", p.method));
    item.append(el("span", "paraphrase-text", p.text));
    if (p.provenance) item.title = p.provenance;
    list.append(item);
  }
  panel.append(list);
  return panel;
}

export function renderHistory(state: ViewState): HTMLElement {
  const section = el("section", "history");
  section.append(el("h2", undefined, "History"));
  const list = el("ol");
  for (const turn of state.history) {
    const item = el("li", "turn");
    item.append(el("span", "turn-question", turn.question));
    const hits = turn.answer.summary.map((s) => `#${s.rank}→seg${s.segment_index}`).join(" ");
    item.append(el("span", "turn-hits", hits));
    list.append(item);
  }
  section.append(list);
  return section;
}

export function renderControls(state: ViewState): HTMLElement {
  const bar = el("div", "controls");

  const select = el("select", "policy-select");
  const blank = el("option", undefined, "— choose a policy —");
  blank.value = "";
  select.append(blank);
  for (const p of state.policies) {
    const option = el("option", undefined, `${p.title || p.id} (${p.n_segments})`);
    option.value = p.id;
    if (state.policy && state.policy.id === p.id) option.selected = true;
    select.append(option);
  }
  bar.append(select);

  const form = el("form", "ask-form");
  const input = el("input", "question-input");
  input.type = "text";
  input.placeholder = "Ask about this policy…";
  input.value = state.question;
  const button = el("button", "ask-button", state.busy ? "Asking…" : "Ask");
  button.type = "submit";
  button.disabled = state.busy;
  form.append(input, button);
  bar.append(form);

  const kWrap = el("label", "k-control", `top ${state.k}`);
  const slider = el("input", "k-slider");
  slider.type = "range";
  slider.min = "1";
  slider.max = "20";
  slider.value = String(state.k);
  kWrap.append(slider);
  bar.append(kWrap);

  const orderWrap = el("label", "order-control", "document order");
  const toggle = el("input", "order-toggle");
  toggle.type = "checkbox";
  toggle.checked = state.order === "document";
  orderWrap.prepend(toggle);
  bar.append(orderWrap);

  return bar;
}

export function render(root: HTMLElement, state: ViewState): void {
  root.textContent = "";
  root.append(renderControls(state));
  if (state.error) {
    root.append(el("div", "banner error", state.error));
  }
  if (state.notice) {
    root.append(el("div", "banner notice", state.notice));
  }
  const main = el("main", "layout");
  main.append(renderPolicy(state));
  main.append(renderParaphrases(state));
  root.append(main);
  root.append(renderHistory(state));
}
