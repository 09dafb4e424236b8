import type { AnswerPayload, PolicyDetail, PolicySummary } from "../src/api.js";

export const POLICY_LIST: PolicySummary[] = [
  { id: "acme", title: "Acme Privacy Policy", n_segments: 6 },
];

export const POLICY: PolicyDetail = {
  id: "acme",
  title: "Acme Privacy Policy",
  segments: [
    "We collect your name and email address when you register.",
    "Usage data is shared with advertising partners.",
    "Cookies remember your site preferences.",
    "You can delete your account at any time.",
    "Payment details are processed by a third party provider.",
    "Contact our support team with further questions.",
  ],
};

export function answerWithK(k: number): AnswerPayload {
  const ranked = [3, 1, 4, 0, 2, 5];
  return {
    query: "can I delete my account?",
    paraphrases: [
      { text: "can I delete my account?", method: "ORIGINAL", provenance: "input query" },
      { text: "can the user erase the account?", method: "RULE_ONE", provenance: "delete => erase" },
      { text: "kann ich mein Konto löschen?", method: "BACK_TRANSLATION", provenance: "pivot=de" },
    ],
    summary: ranked.slice(0, k).map((segmentIndex, i) => ({
      rank: i + 1,
      segment_index: segmentIndex,
      segment_text: POLICY.segments[segmentIndex],
      score: 3.0 - i * 0.4,
      winning_paraphrase:
        i === 0 ? "can the user erase the account?" : "can I delete my account?",
      winning_method: i === 0 ? "RULE_ONE" : "ORIGINAL",
      best_span:
        i === 0
          ? { start: 2, end: 3, text: "delete your account", answerable: true }
          : null,
    })),
    timing_ms: 7.5,
  };
}
