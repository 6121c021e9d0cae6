"""Evaluation and correlation machinery.

Covers rank correlation (with tied ranks), split-half consistency of human
ratings, object-category importance, retrieval evaluation against a baseline,
and the two experiment curves (training-sentence count and feature-based
specificity prediction).
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import stdtr

from .corpus import Dataset, Description, HumanRating, ImageRecord, split_pool
from .lexsim import Lexicon, TfIdfModel, fit_tfidf, word_contribution
from .predict import SvrHyper, fit_specificity_regressor, loocv_predict_params
from .retrieval import (
    LRParams,
    Ranking,
    rank_baseline,
    rank_with_params,
    train_all_lr,
)
from .specificity import SpecificityScore, dataset_specificity, human_specificity, pool_tfidf

__all__ = [
    "AnalysisError",
    "EvalReport",
    "ProtocolResult",
    "spearman",
    "spearman_pvalue",
    "split_half_consistency",
    "category_importance",
    "evaluate_retrieval",
    "report_from_ranks",
    "run_retrieval_protocol",
    "training_sentence_curve",
    "full_gt_mean_rank",
    "correlate_annotations",
    "specificity_prediction_curve",
]

METHODS = ("baseline", "gt_spec", "pred_spec")


class AnalysisError(ValueError):
    """Invalid input to an analysis computation."""


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-indexed ranks; tied values all receive the average of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    sorted_values = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average-ranked data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.shape[0] < 2:
        raise AnalysisError("rank correlation needs at least 2 observations")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise AnalysisError("zero-variance input: rank correlation is undefined")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx @ ry) / math.sqrt((rx @ rx) * (ry @ ry)))


def spearman_pvalue(rho: float, n: int) -> float:
    """Two-sided p-value via the t approximation with n - 2 degrees of freedom.

    Reported for context only; nothing in this package thresholds on it.
    """
    if n < 3:
        return float("nan")
    if abs(rho) >= 1.0:
        return 0.0
    t = abs(rho) * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * (1.0 - stdtr(n - 2, t)))


def split_half_consistency(
    ratings: Sequence[HumanRating], n_splits: int, seed: int
) -> float:
    """Mean correlation of per-image specificity across subject splits.

    Each split holds one subject's ratings out as one half and the remaining
    subjects' ratings as the other half.
    """
    if n_splits < 1:
        raise AnalysisError(f"n_splits must be >= 1, got {n_splits}")
    by_image: dict[str, list[HumanRating]] = {}
    for r in ratings:
        by_image.setdefault(r.image_id, []).append(r)
    if not by_image:
        raise AnalysisError("no ratings supplied")
    for image_id, rs in by_image.items():
        if len({r.subject for r in rs}) < 2:
            raise AnalysisError(
                f"image {image_id!r} rated by fewer than 2 subjects; splits are impossible"
            )
    subjects = sorted({r.subject for r in ratings})
    order = np.random.default_rng([seed, len(subjects)]).permutation(len(subjects))
    rhos = []
    for k in range(n_splits):
        held = subjects[int(order[k % len(subjects)])]
        half_a, half_b = [], []
        for rs in by_image.values():
            part_a = [r for r in rs if r.subject == held]
            part_b = [r for r in rs if r.subject != held]
            if part_a and part_b:
                half_a.append(human_specificity(part_a).value)
                half_b.append(human_specificity(part_b).value)
        rhos.append(spearman(half_a, half_b))
    return float(np.mean(rhos))


def category_importance(db: Dataset, category: str, lex: Lexicon, seed: int) -> float:
    """How strongly sentences of category-containing images mention the
    category, relative to sentences of other images.

    Both terms average, over sentences, the best word match against the
    category name; the second term uses an equal-sized seeded sample of
    sentences from images without the category.
    """
    lemma = category.lower().strip()
    with_cat, without_cat = [], []
    for rec in db:
        present = bool(rec.annotations) and rec.annotations.get(category, 0.0) > 0.0
        (with_cat if present else without_cat).append(rec)
    if len(with_cat) <= 10:
        raise AnalysisError(
            f"category {category!r} present in only {len(with_cat)} images; more than 10 required"
        )
    cat_sentences = [d for rec in with_cat for d in rec.pool]
    other_sentences = [d for rec in without_cat for d in rec.pool]
    if not other_sentences:
        raise AnalysisError(f"no sentences outside category {category!r} to sample")
    rng = np.random.default_rng([seed, _stable_id_hash(category)])
    k = min(len(cat_sentences), len(other_sentences))
    sample_idx = rng.choice(len(other_sentences), size=k, replace=False)
    mentioned = float(np.mean([word_contribution(lemma, d, lex) for d in cat_sentences]))
    prior = float(np.mean([word_contribution(lemma, other_sentences[i], lex) for i in sample_idx]))
    return mentioned - prior


@dataclass(frozen=True)
class EvalReport:
    """Retrieval quality of one method against the baseline ranking."""

    method: str
    mean_rank: float
    pct_meet_or_beat_baseline: float
    margin_curve: tuple[tuple[int, float], ...]
    n_queries: int

    def to_text(self) -> str:
        lines = [
            f"method: {self.method}",
            f"n_queries: {self.n_queries}",
            f"mean_rank: {self.mean_rank:.4f}",
            f"pct_meet_or_beat_baseline: {self.pct_meet_or_beat_baseline:.2f}",
            "margin_curve:",
            "K,pct",
        ]
        lines += [f"{k},{pct:.2f}" for k, pct in self.margin_curve]
        return "\n".join(lines)


def evaluate_retrieval(
    rankings: Sequence[Ranking],
    targets: Mapping[str, str],
    baseline_rankings: Sequence[Ranking],
    method: str = "gt_spec",
) -> EvalReport:
    """Mean 1-indexed target rank, meet-or-beat percentage and margin curve.

    Ties with the baseline rank count as wins; margin_curve(K) is the
    percentage of queries where the baseline rank exceeds the method rank by
    at least K.
    """
    if method not in METHODS:
        raise AnalysisError(f"unknown method {method!r}; expected one of {METHODS}")
    if not rankings:
        raise AnalysisError("no rankings to evaluate")
    base_by_query = {r.query_id: r for r in baseline_rankings}
    db_size = len(rankings[0].entries)
    method_ranks, base_ranks = [], []
    for ranking in rankings:
        if ranking.query_id not in targets:
            raise AnalysisError(f"no target recorded for query {ranking.query_id!r}")
        if ranking.query_id not in base_by_query:
            raise AnalysisError(f"no baseline ranking for query {ranking.query_id!r}")
        target = targets[ranking.query_id]
        method_ranks.append(ranking.rank_of(target))
        base_ranks.append(base_by_query[ranking.query_id].rank_of(target))
    return report_from_ranks(method_ranks, base_ranks, db_size, method)


def report_from_ranks(
    method_ranks: Sequence[int],
    baseline_ranks: Sequence[int],
    db_size: int,
    method: str,
) -> EvalReport:
    """Build an :class:`EvalReport` from paired per-query target ranks."""
    if len(method_ranks) != len(baseline_ranks):
        raise AnalysisError(
            f"{len(method_ranks)} method ranks vs {len(baseline_ranks)} baseline ranks"
        )
    if not method_ranks:
        raise AnalysisError("no ranks to evaluate")
    method_arr = np.asarray(method_ranks, dtype=float)
    base_arr = np.asarray(baseline_ranks, dtype=float)
    margins = base_arr - method_arr
    curve = tuple(
        (k, 100.0 * float(np.mean(margins >= k))) for k in range(1, max(2, db_size))
    )
    return EvalReport(
        method=method,
        mean_rank=float(method_arr.mean()),
        pct_meet_or_beat_baseline=100.0 * float(np.mean(method_arr <= base_arr)),
        margin_curve=curve,
        n_queries=len(method_ranks),
    )


def _stable_id_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _training_view(db: Dataset, parts: Mapping[str, Sequence[Description]]) -> Dataset:
    images = tuple(
        ImageRecord(
            id=rec.id,
            reference=rec.reference,
            pool=tuple(parts[rec.id]),
            features=rec.features,
            annotations=rec.annotations,
        )
        for rec in db
    )
    return Dataset(name=f"{db.name}:train", images=images)


@dataclass(frozen=True)
class ProtocolResult:
    """Everything produced by one evaluation run: held-out queries, their
    target images, per-method rankings and reports, and the LR parameters."""

    queries: tuple[Description, ...]
    targets: dict[str, str]
    rankings: dict[str, list[Ranking]]
    reports: dict[str, EvalReport]
    gt_params: dict[str, LRParams] | None = None
    pred_params: dict[str, LRParams] | None = None
    tfidf: TfIdfModel | None = field(default=None, compare=False)


def run_retrieval_protocol(
    db: Dataset,
    lex: Lexicon,
    methods: Sequence[str] = ("baseline", "gt_spec"),
    n_train: int | None = None,
    seed: int = 0,
    hyper: SvrHyper | None = None,
) -> ProtocolResult:
    """Split pools, train per-image LR models on the training halves, and
    rank every held-out sentence as a query against the full database.

    Queries and reference descriptions never enter LR training; the TF-IDF
    model is fitted on training-pool sentences only.
    """
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise AnalysisError(f"unknown methods {unknown}; expected among {METHODS}")
    if len(db) == 0:
        raise AnalysisError("cannot evaluate an empty dataset")
    n = db.pool_size
    if n_train is None:
        n_train = max(2, n - 2)
    if not 2 <= n_train < n:
        raise AnalysisError(f"n_train must be in [2, {n - 1}] to leave held-out queries")
    parts: dict[str, list[Description]] = {}
    queries: list[Description] = []
    targets: dict[str, str] = {}
    for rec in db:
        train, held = split_pool(rec, n_train, seed)
        parts[rec.id] = train
        for k, sentence in enumerate(held):
            query_id = f"{rec.id}::q{k}"
            queries.append(Description(image_id=query_id, text=sentence.text))
            targets[query_id] = rec.id
    tfidf = fit_tfidf([list(d.tokens) for part in parts.values() for d in part])

    rankings: dict[str, list[Ranking]] = {}
    baseline_rankings = [rank_baseline(q, db, lex, tfidf) for q in queries]
    if "baseline" in methods:
        rankings["baseline"] = baseline_rankings
    gt_params = pred_params = None
    if "gt_spec" in methods or "pred_spec" in methods:
        view = _training_view(db, parts)
        gt_params = train_all_lr(view, lex, tfidf, seed)
        if "gt_spec" in methods:
            rankings["gt_spec"] = [
                rank_with_params(q, db, gt_params, lex, tfidf) for q in queries
            ]
        if "pred_spec" in methods:
            pred_params = loocv_predict_params(db, gt_params, hyper)
            rankings["pred_spec"] = [
                rank_with_params(q, db, pred_params, lex, tfidf) for q in queries
            ]
    reports = {
        m: evaluate_retrieval(rankings[m], targets, baseline_rankings, method=m)
        for m in rankings
    }
    return ProtocolResult(
        queries=tuple(queries),
        targets=targets,
        rankings=rankings,
        reports=reports,
        gt_params=gt_params,
        pred_params=pred_params,
        tfidf=tfidf,
    )


def _fold_seed(seed: int, repeat: int, count: int) -> int:
    return (seed * 1_000_003 + repeat * 1_009 + count) % (2**62)


def _curve_queries(
    db: Dataset, seed: int, repeat: int
) -> tuple[list[Description], dict[str, str]]:
    queries, targets = [], {}
    for rec in db:
        rng = np.random.default_rng([seed, repeat, _stable_id_hash(rec.id)])
        idx = int(rng.integers(rec.pool_size))
        query_id = f"{rec.id}::r{repeat}"
        queries.append(Description(image_id=query_id, text=rec.pool[idx].text))
        targets[query_id] = rec.id
    return queries, targets


def training_sentence_curve(
    db: Dataset,
    lex: Lexicon,
    sentence_counts: Sequence[int],
    n_repeats: int,
    seed: int,
) -> list[tuple[int, float, float]]:
    """Mean target rank of the ground-truth LR ranker as a function of the
    number of training sentences per image.

    For each repeat, one query per image is drawn from its pool; LR models
    are trained on seeded pool subsets of the requested size.  At the full
    pool size the subset is the whole pool, reproducing the standard
    ground-truth result for that repeat's queries.
    """
    if len(db) == 0:
        raise AnalysisError("cannot evaluate an empty dataset")
    n = db.pool_size
    for count in sentence_counts:
        if count > n:
            raise AnalysisError(f"requested {count} training sentences but pools hold {n}")
        if count < 2:
            raise AnalysisError("LR training needs at least 2 sentences per image")
    if n_repeats < 1:
        raise AnalysisError("n_repeats must be >= 1")
    curve = []
    for count in sentence_counts:
        per_repeat = []
        for repeat in range(n_repeats):
            fold_seed = _fold_seed(seed, repeat, count)
            parts = {}
            for rec in db:
                train, _ = split_pool(rec, count, fold_seed)
                parts[rec.id] = train
            view = _training_view(db, parts)
            tfidf = fit_tfidf([list(d.tokens) for part in parts.values() for d in part])
            params = train_all_lr(view, lex, tfidf, fold_seed)
            queries, targets = _curve_queries(db, seed, repeat)
            ranks = [
                rank_with_params(q, db, params, lex, tfidf).rank_of(targets[q.image_id])
                for q in queries
            ]
            per_repeat.append(float(np.mean(ranks)))
        mean = float(np.mean(per_repeat))
        stderr = (
            float(np.std(per_repeat, ddof=1) / math.sqrt(len(per_repeat)))
            if len(per_repeat) > 1
            else 0.0
        )
        curve.append((count, mean, stderr))
    return curve


def full_gt_mean_rank(db: Dataset, lex: Lexicon, seed: int, repeat: int) -> float:
    """Ground-truth-LR mean rank with the whole pool as training data, on the
    same queries the training-sentence curve uses for ``repeat``."""
    tfidf = pool_tfidf(db)
    params = train_all_lr(db, lex, tfidf, _fold_seed(seed, repeat, db.pool_size))
    queries, targets = _curve_queries(db, seed, repeat)
    ranks = [
        rank_with_params(q, db, params, lex, tfidf).rank_of(targets[q.image_id])
        for q in queries
    ]
    return float(np.mean(ranks))


def _derived_covariates(rec: ImageRecord) -> dict[str, float]:
    lengths = [float(len(d.text.split())) for d in rec.pool]
    return {
        "mean_sentence_length": float(np.mean(lengths)),
        "sentence_length_std": float(np.std(lengths)),
    }


def correlate_annotations(
    db: Dataset, scores: Sequence[SpecificityScore]
) -> list[tuple[str, float]]:
    """Spearman correlation of specificity with every annotation plus the
    derived sentence-length covariates, sorted by descending correlation.

    Constant annotations are skipped with a warning.
    """
    spec_by_id = {s.image_id: s.value for s in scores}
    columns: dict[str, dict[str, float]] = {}
    for rec in db:
        if rec.id not in spec_by_id:
            continue
        values = dict(rec.annotations or {})
        values.update(_derived_covariates(rec))
        for name, value in values.items():
            columns.setdefault(name, {})[rec.id] = float(value)
    results = []
    for name, by_id in sorted(columns.items()):
        ids = sorted(by_id)
        xs = [by_id[i] for i in ids]
        ys = [spec_by_id[i] for i in ids]
        if len(ids) < 2 or np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
            warnings.warn(f"skipping constant or underpopulated annotation {name!r}")
            continue
        results.append((name, spearman(xs, ys)))
    results.sort(key=lambda item: (-item[1], item[0]))
    return results


def specificity_prediction_curve(
    db: Dataset,
    lex: Lexicon,
    train_sizes: Sequence[int],
    n_heldout: int,
    n_runs: int = 50,
    seed: int = 0,
    hyper: SvrHyper | None = None,
) -> list[tuple[int, float, float]]:
    """Rank correlation between feature-predicted and automated specificity
    on a fixed held-out set, as the number of training images grows."""
    if len(db) < 4:
        raise AnalysisError("need at least 4 images for a prediction curve")
    if not 1 <= n_heldout <= len(db) - 2:
        raise AnalysisError("n_heldout must leave at least 2 training images")
    if any(rec.features is None for rec in db):
        raise AnalysisError("every image needs features for specificity prediction")
    spec = np.array([s.value for s in dataset_specificity(db, lex)])
    features = np.asarray([rec.features for rec in db], dtype=float)
    max_train = len(db) - n_heldout
    for size in train_sizes:
        if not 2 <= size <= max_train:
            raise AnalysisError(f"train size {size} outside [2, {max_train}]")
    curve = []
    for size in train_sizes:
        rhos = []
        for run in range(n_runs):
            rng = np.random.default_rng([seed, run])
            perm = rng.permutation(len(db))
            held = perm[:n_heldout]
            train = perm[n_heldout : n_heldout + size]
            reg = fit_specificity_regressor(features[train], spec[train], hyper)
            predicted = reg.predict_many(features[held])
            rhos.append(spearman(predicted, spec[held]))
        mean = float(np.mean(rhos))
        sem = (
            float(np.std(rhos, ddof=1) / math.sqrt(len(rhos))) if len(rhos) > 1 else 0.0
        )
        curve.append((size, mean, sem))
    return curve
