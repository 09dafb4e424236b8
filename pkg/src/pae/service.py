"""HTTP API: policy ingestion, interactive querying, evaluation, health.

Policies are persisted to an append-only JSONL log and reloaded at startup,
so a restarted service answers identically. Querying is stateless per
request; the store is guarded by a single writer lock.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from pae.config import ServiceConfig
from pae.corpus import PolicyDocument, ingest_policy, load_privacyqa
from pae.errors import EmptyPolicy, FormatError, ScorerUnavailable, TranslatorUnavailable, UnknownPolicy
from pae.evaluation import ablation_run
from pae.pipeline import Resources, answer_payload, answer_question
from pae.ranking import Presentation

logger = logging.getLogger(__name__)


class PolicyStore:
    """In-memory policy map backed by an append-only JSONL log."""

    def __init__(self, path: str | Path, resources: Resources):
        self.path = Path(path)
        self._resources = resources
        self._policies: dict[str, PolicyDocument] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    doc = ingest_policy(
                        record["id"],
                        record["segments"],
                        title=record.get("title", ""),
                        lexicon=resources.lexicon,
                    )
                    self._policies[doc.id] = doc

    def __contains__(self, policy_id: str) -> bool:
        return policy_id in self._policies

    def __len__(self) -> int:
        return len(self._policies)

    def get(self, policy_id: str) -> PolicyDocument | None:
        return self._policies.get(policy_id)

    def list(self) -> list[PolicyDocument]:
        return list(self._policies.values())

    def add(self, doc: PolicyDocument) -> None:
        with self._lock:
            if doc.id in self._policies:
                raise KeyError(doc.id)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "id": doc.id,
                            "title": doc.title,
                            "segments": [seg.text for seg in doc.segments],
                        }
                    )
                    + "\n"
                )
            self._policies[doc.id] = doc


class PolicyIn(BaseModel):
    id: str
    title: str = ""
    segments: list[str] | None = None
    raw: str | None = None


class QueryIn(BaseModel):
    policy_id: str
    question: str
    k: int | None = Field(default=None, ge=1)
    presentation_order: str = "rank"


class EvaluateIn(BaseModel):
    dataset_path: str
    ks: list[int] = [5, 10]
    ablations: list[str] = ["full"]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    resources = Resources.from_config(config)
    store = PolicyStore(config.store, resources)
    app = FastAPI(title="policy-answer-engine")

    @app.get("/health")
    def health() -> dict:
        status = "ok"
        if resources.remote_scorer is not None:
            try:
                resources.remote_scorer.health()
            except ScorerUnavailable:
                status = "degraded"
        return {"status": status, "backend": resources.backend_name, "n_policies": len(store)}

    @app.get("/policies")
    def list_policies() -> dict:
        return {
            "policies": [
                {"id": p.id, "title": p.title, "n_segments": len(p.segments)}
                for p in store.list()
            ]
        }

    @app.get("/policies/{policy_id}")
    def get_policy(policy_id: str) -> dict:
        doc = store.get(policy_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown policy {policy_id!r}")
        return {
            "id": doc.id,
            "title": doc.title,
            "segments": [seg.text for seg in doc.segments],
        }

    @app.post("/policies")
    def add_policy(body: PolicyIn) -> dict:
        if body.id in store:
            raise HTTPException(status_code=409, detail=f"policy {body.id!r} already ingested")
        raw = body.segments if body.segments is not None else body.raw
        if raw is None:
            raise HTTPException(status_code=422, detail="provide either 'segments' or 'raw'")
        try:
            doc = ingest_policy(body.id, raw, title=body.title, lexicon=resources.lexicon)
        except EmptyPolicy as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        try:
            store.add(doc)
        except KeyError:
            raise HTTPException(status_code=409, detail=f"policy {body.id!r} already ingested") from None
        return {"id": doc.id, "n_segments": len(doc.segments)}

    @app.post("/query")
    def query(body: QueryIn) -> dict:
        doc = store.get(body.policy_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown policy {body.policy_id!r}")
        if not body.question.strip():
            raise HTTPException(status_code=422, detail="question must be non-empty")
        try:
            order = Presentation(body.presentation_order.lower())
        except ValueError:
            raise HTTPException(
                status_code=422, detail="presentation_order must be 'rank' or 'document'"
            ) from None
        try:
            result = answer_question(doc, body.question, resources, k=body.k, order=order)
        except ScorerUnavailable as exc:
            raise HTTPException(
                status_code=502, detail={"backend": "scorer", "error": str(exc)}
            ) from None
        except TranslatorUnavailable as exc:
            raise HTTPException(
                status_code=502, detail={"backend": "translator", "error": str(exc)}
            ) from None
        return answer_payload(doc, body.question, result)

    @app.post("/evaluate")
    def evaluate_dataset(body: EvaluateIn) -> dict:
        path = Path(body.dataset_path)
        if not path.exists():
            raise HTTPException(status_code=422, detail=f"dataset {body.dataset_path!r} not found")
        with open(path, encoding="utf-8") as fh:
            n_rows = sum(1 for _ in fh)
        if n_rows > config.max_eval_rows:
            raise HTTPException(
                status_code=422,
                detail=f"dataset has {n_rows} rows, over the {config.max_eval_rows} limit; "
                "use the CLI for batch evaluation",
            )
        try:
            policies, queries = load_privacyqa(path, lexicon=resources.lexicon)
            reports = ablation_run(
                policies,
                queries,
                resources.expansion,
                resources.scorer_for,
                resources.rank_config(),
                ks=body.ks,
                configs=tuple(body.ablations),
            )
        except (FormatError, UnknownPolicy, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except (ScorerUnavailable, TranslatorUnavailable) as exc:
            raise HTTPException(
                status_code=502, detail={"backend": "scorer", "error": str(exc)}
            ) from None
        return {
            "reports": {
                name: {
                    "rows": report.rows(name),
                    "mrr": report.mrr,
                    "n_queries": report.n_queries,
                    "n_out_of_scope": report.n_out_of_scope,
                }
                for name, report in reports.items()
            }
        }

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def main() -> None:  # pragma: no cover - thin uvicorn wrapper
    import uvicorn

    from pae.config import load_config

    config = load_config()
    uvicorn.run(create_app(config), host=config.host, port=config.port)
