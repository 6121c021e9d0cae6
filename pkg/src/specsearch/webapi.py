"""Read-only HTTP API over a loaded dataset.

All state (dataset, lexicon, TF-IDF, LR parameters, specificity scores) is
assembled once at startup; request handlers only read it, so concurrent
requests need no locking.  Rankings served over HTTP delegate to the library
rankers and therefore order results identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .corpus import Dataset, Description
from .lexsim import Lexicon, TfIdfModel, tokenize
from .retrieval import LRParams, Ranking, rank_baseline, rank_with_params
from .specificity import SpecificityScore, dataset_specificity, pool_tfidf

__all__ = ["ServerState", "build_state", "create_app", "MAX_SEARCH_WORDS"]

#: Hard cap on whole-word browse terms.
MAX_SEARCH_WORDS = 6

_METHOD_ALIASES = {"baseline": "baseline", "gt": "gt_spec", "pred": "pred_spec"}


@dataclass
class ServerState:
    """Everything a running server needs, immutable by convention."""

    dataset: Dataset
    lexicon: Lexicon
    tfidf: TfIdfModel
    specificity: dict[str, float]
    scores: dict[str, dict[str, float]]  # image id -> score name -> value
    score_names: list[str]
    gt_params: dict[str, LRParams] | None = None
    pred_params: dict[str, LRParams] | None = None
    tokens: dict[str, frozenset[str]] = field(default_factory=dict)

    def params_for(self, method: str) -> dict[str, LRParams] | None:
        if method == "gt":
            return self.gt_params
        if method == "pred":
            return self.pred_params
        return None


def _derived_scores(rec) -> dict[str, float]:
    lengths = [float(len(d.text.split())) for d in rec.pool]
    mean = sum(lengths) / len(lengths)
    var = sum((v - mean) ** 2 for v in lengths) / len(lengths)
    return {"mean_sentence_length": mean, "sentence_length_std": var**0.5}


def build_state(
    dataset: Dataset,
    lexicon: Lexicon,
    scores: list[SpecificityScore] | None = None,
    gt_params: dict[str, LRParams] | None = None,
    pred_params: dict[str, LRParams] | None = None,
) -> ServerState:
    """Assemble server state; computes automated specificity when no
    precomputed scores are supplied."""
    tfidf = pool_tfidf(dataset)
    if scores is None:
        scores = dataset_specificity(dataset, lexicon, tfidf)
    spec_by_id = {s.image_id: s.value for s in scores}
    missing = [rec.id for rec in dataset if rec.id not in spec_by_id]
    if missing:
        raise ValueError(f"specificity scores missing for images {missing[:5]}")
    table: dict[str, dict[str, float]] = {}
    names: set[str] = set()
    tokens: dict[str, frozenset[str]] = {}
    for rec in dataset:
        row = {"specificity": spec_by_id[rec.id]}
        row.update(_derived_scores(rec))
        for key, value in (rec.annotations or {}).items():
            row[key] = float(value)
        table[rec.id] = row
        names.update(row)
        bag: set[str] = set(rec.reference.tokens)
        for d in rec.pool:
            bag.update(d.tokens)
        tokens[rec.id] = frozenset(bag)
    return ServerState(
        dataset=dataset,
        lexicon=lexicon,
        tfidf=tfidf,
        specificity=spec_by_id,
        scores=table,
        score_names=sorted(names),
        gt_params=gt_params,
        pred_params=pred_params,
        tokens=tokens,
    )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _parse_words(raw: str) -> list[str]:
    words = [w for chunk in raw.split(",") for w in chunk.split()] if raw else []
    normalized = []
    for word in words:
        tokens = tokenize(word)
        normalized.append(tokens[0] if len(tokens) == 1 else word.lower())
    return normalized


def create_app(state: ServerState) -> FastAPI:
    app = FastAPI(title="specsearch", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _validation_as_400(request: Request, exc: RequestValidationError):
        return _error(400, f"invalid request: {exc.errors()[0].get('msg', 'bad parameter')}")

    @app.get("/api/meta")
    def meta():
        return {
            "dataset": state.dataset.name,
            "size": len(state.dataset),
            "pool_size": state.dataset.pool_size if len(state.dataset) else 0,
            "scores": state.score_names,
            "methods": [m for m in ("baseline", "gt", "pred") if m == "baseline" or state.params_for(m)],
        }

    @app.get("/api/search")
    def search(q: str = "", method: str = "baseline", limit: int = 10):
        if not q.strip():
            return _error(400, "query text must be non-empty")
        if method not in _METHOD_ALIASES:
            return _error(400, f"unknown method {method!r}; expected baseline, gt or pred")
        if limit < 1:
            return _error(400, "limit must be >= 1")
        query = Description(image_id="query", text=q)
        if method == "baseline":
            ranking: Ranking = rank_baseline(query, state.dataset, state.lexicon, state.tfidf)
        else:
            params = state.params_for(method)
            if params is None:
                return _error(400, f"method {method!r} has no parameters loaded")
            ranking = rank_with_params(query, state.dataset, params, state.lexicon, state.tfidf)
        results = [
            {
                "rank": pos,
                "image_id": image_id,
                "relevance": relevance,
                "specificity": state.specificity[image_id],
            }
            for pos, (image_id, relevance) in enumerate(ranking.entries[:limit], start=1)
        ]
        return {"query": q, "method": method, "results": results}

    @app.get("/api/images")
    def browse(request: Request):
        params = dict(request.query_params)
        words = _parse_words(params.pop("words", ""))
        if len(words) > MAX_SEARCH_WORDS:
            return _error(400, f"at most {MAX_SEARCH_WORDS} search words are allowed")
        ranges: dict[str, tuple[float, float]] = {}
        for key, raw in params.items():
            if key.endswith("_min"):
                name, slot = key[: -len("_min")], 0
            elif key.endswith("_max"):
                name, slot = key[: -len("_max")], 1
            else:
                return _error(400, f"unknown parameter {key!r}")
            if name not in state.score_names:
                return _error(400, f"unknown score {name!r}")
            try:
                value = float(raw)
            except ValueError:
                return _error(400, f"parameter {key!r} must be a number")
            lo, hi = ranges.get(name, (float("-inf"), float("inf")))
            ranges[name] = (value, hi) if slot == 0 else (lo, value)
        for name, (lo, hi) in ranges.items():
            if lo > hi:
                return _error(400, f"inverted range for score {name!r}: {lo} > {hi}")
        matches = []
        for rec in state.dataset:
            bag = state.tokens[rec.id]
            if any(word not in bag for word in words):
                continue
            row = state.scores[rec.id]
            ok = True
            for name, (lo, hi) in ranges.items():
                value = row.get(name)
                if value is None or not lo <= value <= hi:
                    ok = False
                    break
            if ok:
                matches.append(
                    {"id": rec.id, "reference": rec.reference.text, "scores": row}
                )
        return {"count": len(matches), "images": matches}

    @app.get("/api/image/{image_id}")
    def image(image_id: str):
        if image_id not in state.dataset:
            return _error(404, f"unknown image {image_id!r}")
        rec = state.dataset.get(image_id)
        return {
            "id": rec.id,
            "reference": rec.reference.text,
            "descriptions": [d.text for d in rec.pool],
            "scores": state.scores[rec.id],
            "annotations": rec.annotations or {},
        }

    return app
