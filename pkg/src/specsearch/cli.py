"""Command-line entry point.

Subcommands: ingest, specificity, train, predict, rank, evaluate, serve.
Every subcommand reads and writes the file formats owned by the library
modules (JSONL datasets and lexicons, CSV scores/params, JSON models) and
exits 0 on success, nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import analysis, corpus, lexsim, predict, retrieval, specificity
from .webapi import build_state, create_app

_METHOD_ALIASES = {"baseline": "baseline", "gt": "gt_spec", "pred": "pred_spec"}


def _add_dataset_args(parser, lexicon=True):
    parser.add_argument("--dataset", required=True, help="dataset JSONL file")
    if lexicon:
        parser.add_argument("--lexicon", required=True, help="lexicon JSONL file")


def _load(args, lexicon=True):
    db = corpus.load_dataset(args.dataset)
    lex = lexsim.load_lexicon(args.lexicon) if lexicon else None
    return db, lex


def _hyper_from(args) -> predict.SvrHyper:
    return predict.SvrHyper(nu=args.nu, c=args.c, gamma=args.gamma)


def _add_hyper_args(parser):
    parser.add_argument("--nu", type=float, default=0.5, help="nu-SVR nu (default 0.5)")
    parser.add_argument("--c", type=float, default=1.0, help="nu-SVR C (default 1.0)")
    parser.add_argument("--gamma", type=float, default=None, help="RBF gamma (default: derived)")


def cmd_ingest(args) -> int:
    db = corpus.load_dataset(args.dataset, format=args.format)
    corpus.write_dataset(db, args.out)
    dim = db.feature_dim if db.feature_dim is not None else "none"
    print(f"ingested {len(db)} images (pool size {db.pool_size}, feature dim {dim}) -> {args.out}")
    return 0


def cmd_specificity(args) -> int:
    db, lex = _load(args)
    if args.ratings:
        ratings = corpus.load_ratings(args.ratings, dataset=db)
        by_image: dict[str, list] = {}
        for r in ratings:
            by_image.setdefault(r.image_id, []).append(r)
        scores = [specificity.human_specificity(rs) for rs in by_image.values()]
    else:
        scores = specificity.dataset_specificity(db, lex)
    specificity.write_scores(scores, args.out)
    print(f"wrote {len(scores)} specificity scores -> {args.out}")
    return 0


def cmd_train(args) -> int:
    db, lex = _load(args)
    tfidf = specificity.pool_tfidf(db)
    params = retrieval.train_all_lr(db, lex, tfidf, args.seed)
    retrieval.write_params(params, args.out)
    print(f"trained LR parameters for {len(params)} images -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    db = corpus.load_dataset(args.dataset)
    gt = retrieval.read_params(args.params)
    predicted = predict.loocv_predict_params(db, gt, _hyper_from(args))
    retrieval.write_params(predicted, args.out)
    print(f"predicted LR parameters for {len(predicted)} images -> {args.out}")
    return 0


def cmd_rank(args) -> int:
    db, lex = _load(args)
    tfidf = specificity.pool_tfidf(db)
    query = corpus.Description(image_id="query", text=args.query)
    if args.method == "baseline":
        ranking = retrieval.rank_baseline(query, db, lex, tfidf)
    else:
        if not args.params:
            raise retrieval.RetrievalError(f"--params is required for method {args.method!r}")
        params = retrieval.read_params(args.params)
        ranking = retrieval.rank_with_params(query, db, params, lex, tfidf)
    limit = args.limit if args.limit else len(ranking.entries)
    print("rank,image_id,relevance")
    for pos, (image_id, relevance) in enumerate(ranking.entries[:limit], start=1):
        print(f"{pos},{image_id},{relevance:.6f}")
    return 0


def _write_ranks(path, report_ranks: dict[str, int]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "target_rank"])
        for query_id in sorted(report_ranks):
            writer.writerow([query_id, report_ranks[query_id]])


def _read_ranks(path) -> dict[str, int]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return {row["query_id"]: int(row["target_rank"]) for row in csv.DictReader(fh)}


def cmd_evaluate(args) -> int:
    db, lex = _load(args)
    if args.curve:
        counts = [int(c) for c in args.curve.split(",") if c]
        curve = analysis.training_sentence_curve(db, lex, counts, args.repeats, args.seed)
        lines = ["count,mean_rank,stderr"] + [
            f"{count},{mean:.6f},{err:.6f}" for count, mean, err in curve
        ]
        text = "\n".join(lines)
    else:
        method = _METHOD_ALIASES[args.method]
        methods = ["baseline"] if method == "baseline" else ["baseline", method]
        result = analysis.run_retrieval_protocol(
            db, lex, methods=methods, n_train=args.n_train, seed=args.seed,
            hyper=_hyper_from(args),
        )
        report = result.reports[method]
        if args.baseline:
            saved = _read_ranks(args.baseline)
            method_ranks, base_ranks = [], []
            for ranking in result.rankings[method]:
                if ranking.query_id not in saved:
                    raise analysis.AnalysisError(
                        f"saved baseline has no rank for query {ranking.query_id!r}"
                    )
                method_ranks.append(ranking.rank_of(result.targets[ranking.query_id]))
                base_ranks.append(saved[ranking.query_id])
            report = analysis.report_from_ranks(method_ranks, base_ranks, len(db), method)
        if args.save_baseline:
            base = {
                r.query_id: r.rank_of(result.targets[r.query_id])
                for r in result.rankings["baseline"]
            }
            _write_ranks(args.save_baseline, base)
        text = report.to_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote report -> {args.out}")
    else:
        print(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    db, lex = _load(args)
    scores = specificity.read_scores(args.scores) if args.scores else None
    gt = retrieval.read_params(args.gt_params) if args.gt_params else None
    pred_params = retrieval.read_params(args.pred_params) if args.pred_params else None
    state = build_state(db, lex, scores=scores, gt_params=gt, pred_params=pred_params)
    app = create_app(state)
    if args.ui:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.ui, html=True), name="ui")
    host, port = args.host, args.port
    bind = os.environ.get("SPECSEARCH_BIND")
    if bind:
        host, _, raw_port = bind.partition(":")
        if raw_port:
            port = int(raw_port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsearch",
        description="Specificity-aware text-based image retrieval toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset and write it in canonical form")
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", default="jsonl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("specificity", help="compute per-image specificity scores")
    _add_dataset_args(p)
    p.add_argument("--ratings", help="human ratings CSV; switches to human specificity")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_specificity)

    p = sub.add_parser("train", help="fit ground-truth LR parameters for every image")
    _add_dataset_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="leave-one-out predict LR parameters from features")
    p.add_argument("--dataset", required=True)
    p.add_argument("--params", required=True, help="ground-truth LR parameters CSV")
    p.add_argument("--out", required=True)
    _add_hyper_args(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("rank", help="rank the database against a query sentence")
    _add_dataset_args(p)
    p.add_argument("--query", required=True)
    p.add_argument("--method", choices=sorted(_METHOD_ALIASES), default="baseline")
    p.add_argument("--params", help="LR parameters CSV (required for gt/pred)")
    p.add_argument("--limit", type=int, default=0, help="truncate output (0 = all)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", help="held-out retrieval evaluation or training curve")
    _add_dataset_args(p)
    p.add_argument("--method", choices=sorted(_METHOD_ALIASES), default="gt")
    p.add_argument("--n-train", type=int, default=None, dest="n_train")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", help="saved baseline target-rank CSV to compare against")
    p.add_argument("--save-baseline", help="write baseline target ranks to this CSV")
    p.add_argument("--curve", help="comma-separated training-sentence counts")
    p.add_argument("--repeats", type=int, default=25)
    p.add_argument("--out")
    _add_hyper_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="serve the read-only HTTP API")
    _add_dataset_args(p)
    p.add_argument("--scores", help="precomputed specificity CSV (else computed at startup)")
    p.add_argument("--gt-params", dest="gt_params")
    p.add_argument("--pred-params", dest="pred_params")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="directory of built frontend assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single diagnostic funnel for the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
