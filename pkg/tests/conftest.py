from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from pae.corpus import PosLexicon, ingest_policy
from pae.expansion import SubstitutionRule


@pytest.fixture(scope="session")
def lexicon() -> PosLexicon:
    return PosLexicon.default()


@pytest.fixture
def toy_rules() -> list[SubstitutionRule]:
    return [
        SubstitutionRule(lhs=("my",), rhs="user's"),
        SubstitutionRule(lhs=("phone",), rhs="device"),
    ]


@pytest.fixture
def small_policy(lexicon):
    return ingest_policy(
        "acme",
        [
            "We collect your name and email address when you register.",
            "Usage data is shared with advertising partners.",
            "You can delete your account at any time.",
        ],
        title="Acme Privacy Policy",
        lexicon=lexicon,
    )


class MockScorerServer:
    """Programmable stand-in for an external scoring service.

    Tests assign `relevance_fn` / `spans_fn` (pairs -> response payload) and
    failure knobs; the server counts requests so retry behaviour can be
    asserted.
    """

    def __init__(self):
        self.relevance_fn = lambda pairs: {"scores": [0.5] * len(pairs)}
        self.spans_fn = lambda pairs: {
            "results": [
                {
                    "tokens": ["a", "b"],
                    "start_logits": [0.0, 0.0],
                    "end_logits": [0.0, 0.0],
                    "null_score": 0.0,
                }
                for _ in pairs
            ]
        }
        self.translate_fn = lambda text, src, tgt: f"{tgt}:{text}"
        self.fail_next = 0  # respond 500 this many times before behaving
        self.force_status: int | None = None  # always respond with this code
        self.raw_body: str | None = None  # send this verbatim instead of JSON
        self.requests: list[tuple[str, dict]] = []

        controller = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _reply(self, code: int, payload: str):
                body = payload.encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if controller.force_status is not None:
                    self._reply(controller.force_status, "{}")
                    return
                if self.path == "/v1/health":
                    self._reply(200, json.dumps({"status": "ok", "model": "mock"}))
                else:
                    self._reply(404, "{}")

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                controller.requests.append((self.path, body))
                if controller.fail_next > 0:
                    controller.fail_next -= 1
                    self._reply(500, json.dumps({"error": "flaky"}))
                    return
                if controller.force_status is not None:
                    self._reply(controller.force_status, json.dumps({"error": "forced"}))
                    return
                if controller.raw_body is not None:
                    self._reply(200, controller.raw_body)
                    return
                if self.path == "/v1/translate":
                    out = controller.translate_fn(
                        body["text"], body["source_lang"], body["target_lang"]
                    )
                    self._reply(200, json.dumps({"text": out}))
                    return
                pairs = [(p["question"], p["segment"]) for p in body.get("pairs", [])]
                if self.path == "/v1/relevance":
                    self._reply(200, json.dumps(controller.relevance_fn(pairs)))
                elif self.path == "/v1/spans":
                    self._reply(200, json.dumps(controller.spans_fn(pairs)))
                else:
                    self._reply(404, "{}")

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        self.url = f"http://127.0.0.1:{self._server.server_address[1]}"

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def scorer_server():
    server = MockScorerServer()
    yield server
    server.close()
