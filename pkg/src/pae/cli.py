"""Command-line front door for batch workflows.

Exit codes: 0 success, 1 user error (bad flags, malformed files),
2 backend failure (scorer or translator unreachable).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pae import __version__
from pae.config import load_config
from pae.corpus import QueryRecord, ingest_policy, load_policyqa, load_privacyqa, tokenize
from pae.embeddings import SgnsConfig, save_word2vec_text, train_sgns
from pae.errors import PaeError, ProtocolError, ScorerUnavailable, TranslatorUnavailable
from pae.evaluation import ablation_run, expansion_report, write_report_rows
from pae.expansion import expand
from pae.pipeline import Resources, answer_payload, answer_question
from pae.ranking import Aggregation, Presentation

USER_ERROR = 1
BACKEND_ERROR = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the exit-code contract
    # reserves 2 for backend failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USER_ERROR)


def _positive_int(value: str) -> int:
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return k


def _int_list(value: str) -> list[int]:
    return [_positive_int(v) for v in value.split(",") if v]


def _build_parser() -> _Parser:
    parser = _Parser(prog="pae", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: _Parser) -> None:
        p.add_argument("--config", help="key=value config file (PAE_* env vars override)")
        p.add_argument("--out", help="write machine-readable JSON output here")
        p.add_argument("--jobs", type=_positive_int, default=None,
                       help="parallel scorer batches (remote backend only; results are identical)")

    p = sub.add_parser("ingest", help="add a policy to the service store")
    common(p)
    p.add_argument("--policy", required=True, help="policy text file (blank-line segments) or JSON")
    p.add_argument("--id", dest="policy_id", default=None, help="policy id (default: file stem)")
    p.add_argument("--title", default="", help="display title")

    p = sub.add_parser("expand", help="print the paraphrase set for a question")
    common(p)
    p.add_argument("--question", required=True)

    p = sub.add_parser("answer", help="answer a question against one policy file")
    common(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--order", choices=[o.value for o in Presentation], default="rank")
    p.add_argument("--aggregation", choices=["max", "mean"], default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--ablate-expansion", action="store_true")
    p.add_argument("--ablate-informativeness", action="store_true")

    p = sub.add_parser("evaluate", help="run retrieval metrics over a labeled dataset")
    common(p)
    p.add_argument("--dataset", required=True, help="tab-separated relevance-labeled dataset")
    p.add_argument("--ks", type=_int_list, default=[5, 10])
    p.add_argument(
        "--ablations",
        default="full,-expansion,-expansion-informativeness",
        help="comma-separated ablation configs",
    )
    p.add_argument("--exclude-out-of-scope", action="store_true")

    p = sub.add_parser("expansion-report", help="answerability gains per expansion method")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--tau", type=float, default=None)

    p = sub.add_parser("train-embeddings", help="train skip-gram word vectors")
    common(p)
    p.add_argument("--corpus", required=True, help="text file, one sentence per line")
    p.add_argument("--vectors-out", required=True, help="where to save the word2vec text file")
    p.add_argument("--dim", type=_positive_int, default=100)
    p.add_argument("--window", type=_positive_int, default=5)
    p.add_argument("--negatives", type=_positive_int, default=5)
    p.add_argument("--epochs", type=_positive_int, default=5)
    p.add_argument("--min-count", type=_positive_int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--subsample", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("fixtures", help="build scorer-protocol conformance fixtures")
    common(p)
    p.add_argument("--policyqa", required=True, help="span-style question/context dataset (JSON)")
    p.add_argument("--fixtures-dir", required=True)
    p.add_argument("--limit", type=_positive_int, default=32)

    p = sub.add_parser("serve", help="start the HTTP service")
    common(p)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)

    return parser


def _resources(args) -> Resources:
    config = load_config(args.config) if args.config else load_config()
    resources = Resources.from_config(config)
    if args.jobs is not None and resources.remote_scorer is not None:
        resources.remote_scorer.in_flight = args.jobs
    return resources


def _write_out(args, payload) -> None:
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _load_policy_file(path: str, policy_id: str | None, title: str, resources: Resources):
    text = Path(path).read_text(encoding="utf-8")
    pid = policy_id or Path(path).stem
    if path.endswith(".json"):
        record = json.loads(text)
        return ingest_policy(
            record.get("id", pid),
            record["segments"],
            title=record.get("title", title),
            lexicon=resources.lexicon,
        )
    return ingest_policy(pid, text, title=title, lexicon=resources.lexicon)


def _cmd_ingest(args) -> int:
    resources = _resources(args)
    doc = _load_policy_file(args.policy, args.policy_id, args.title, resources)
    store_path = Path(resources.config.store)
    from pae.service import PolicyStore

    store = PolicyStore(store_path, resources)
    if doc.id in store:
        print(f"policy {doc.id!r} already in store {store_path}", file=sys.stderr)
        return USER_ERROR
    store.add(doc)
    payload = {"id": doc.id, "n_segments": len(doc.segments), "store": str(store_path)}
    print(f"ingested {doc.id!r}: {len(doc.segments)} segments -> {store_path}")
    _write_out(args, payload)
    return 0


def _cmd_expand(args) -> int:
    resources = _resources(args)
    query = QueryRecord(id="cli", policy_id="-", text=args.question)
    pset = expand(query, resources.expansion)
    for p in pset.items:
        print(f"[{p.method.value:>16}] {p.text}")
    _write_out(
        args,
        {
            "query": args.question,
            "paraphrases": [
                {"text": p.text, "method": p.method.value, "provenance": p.provenance}
                for p in pset.items
            ],
        },
    )
    return 0


def _cmd_answer(args) -> int:
    resources = _resources(args)
    doc = _load_policy_file(args.policy, None, "", resources)
    overrides = {
        "ablate_expansion": args.ablate_expansion,
        "ablate_informativeness": args.ablate_informativeness,
    }
    if args.aggregation:
        overrides["aggregation"] = Aggregation(args.aggregation)
    if args.tau is not None:
        overrides["tau"] = args.tau
    result = answer_question(
        doc,
        args.question,
        resources,
        k=args.k,
        order=Presentation(args.order),
        rank_config=resources.rank_config(**overrides),
    )
    payload = answer_payload(doc, args.question, result)
    print(f"question: {args.question}")
    print(f"paraphrases: {len(result.paraphrases)}")
    for entry in payload["summary"]:
        print(
            f"  #{entry['rank']:<2} seg {entry['segment_index']:<3} "
            f"score {entry['score']:.4f}  {entry['segment_text'][:80]}"
        )
    _write_out(args, payload)
    return 0


def _cmd_evaluate(args) -> int:
    resources = _resources(args)
    policies, queries = load_privacyqa(args.dataset, lexicon=resources.lexicon)
    configs = tuple(c.strip() for c in args.ablations.split(",") if c.strip())
    reports = ablation_run(
        policies,
        queries,
        resources.expansion,
        resources.scorer_for,
        resources.rank_config(),
        ks=args.ks,
        configs=configs,
        include_out_of_scope=not args.exclude_out_of_scope,
    )
    for name, report in reports.items():
        print(report.format_table(name))
    if args.out:
        write_report_rows(args.out, reports)
    return 0


def _cmd_expansion_report(args) -> int:
    resources = _resources(args)
    policies, queries = load_privacyqa(args.dataset, lexicon=resources.lexicon)
    report = expansion_report(
        policies,
        queries,
        resources.expansion,
        resources.scorer_for,
        tau=args.tau if args.tau is not None else resources.config.tau,
    )
    print(report.format_table())
    _write_out(
        args,
        {
            "n_queries": report.n_queries,
            "n_pairs": report.n_pairs,
            "n_unanswerable_pairs_baseline": report.n_unanswerable_pairs_baseline,
            "per_method": {
                name: {
                    "avg_paraphrases": stats.avg_paraphrases,
                    "pct_recovered_pairs": stats.pct_recovered_pairs,
                    "pct_answerable_paraphrases": stats.pct_answerable_paraphrases,
                }
                for name, stats in report.per_method.items()
            },
        },
    )
    return 0


def _cmd_train_embeddings(args) -> int:
    sentences = []
    with open(args.corpus, encoding="utf-8") as fh:
        for line in fh:
            tokens = [t.normalized for t in tokenize(line)]
            if tokens:
                sentences.append(tokens)
    config = SgnsConfig(
        dim=args.dim,
        window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        min_count=args.min_count,
        initial_lr=args.lr,
        subsample=args.subsample,
        seed=args.seed,
    )
    store = train_sgns(sentences, config)
    save_word2vec_text(store, args.vectors_out)
    print(f"trained {len(store)} vectors (dim {store.dim}) -> {args.vectors_out}")
    _write_out(args, {"vocab": len(store), "dim": store.dim, "path": args.vectors_out})
    return 0


def _cmd_fixtures(args) -> int:
    records = load_policyqa(args.policyqa)[: args.limit]
    if not records:
        print("dataset produced no records", file=sys.stderr)
        return USER_ERROR
    out_dir = Path(args.fixtures_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = [{"question": r.question, "segment": r.passage} for r in records]
    (out_dir / "relevance_request.json").write_text(
        json.dumps({"pairs": pairs}, indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "spans_request.json").write_text(
        json.dumps({"pairs": pairs}, indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "expected_answers.json").write_text(
        json.dumps(
            [
                {
                    "question": r.question,
                    "answer_text": r.answer_text,
                    "answer_start": r.answer_start,
                }
                for r in records
            ],
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(records)} conformance pairs to {out_dir}")
    return 0


def _cmd_serve(args) -> int:  # pragma: no cover - spawns a server
    import uvicorn

    from pae.service import create_app

    config = load_config(args.config) if args.config else load_config()
    host = args.host or config.host
    port = args.port or config.port
    uvicorn.run(create_app(config), host=host, port=port)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "expand": _cmd_expand,
    "answer": _cmd_answer,
    "evaluate": _cmd_evaluate,
    "expansion-report": _cmd_expansion_report,
    "train-embeddings": _cmd_train_embeddings,
    "fixtures": _cmd_fixtures,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ScorerUnavailable, TranslatorUnavailable, ProtocolError) as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return BACKEND_ERROR
    except (PaeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
