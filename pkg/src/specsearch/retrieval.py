"""Query-against-database ranking.

Two rankers share the same similarity front end: the baseline sorts images by
raw query-to-reference similarity, while the relevance ranker passes that
similarity through a per-image logistic model whose parameters encode how
specific the image is.  Training pairs for the logistic models come from
within-pool sentence pairs (positives) and cross-image pairs (negatives).
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .corpus import Dataset, Description, ImageRecord
from .lexsim import Lexicon, TfIdfModel, sentence_similarity

__all__ = [
    "RetrievalError",
    "TrainingError",
    "LRParams",
    "LabeledPair",
    "Ranking",
    "LR_PENALTY",
    "sigmoid",
    "rank_baseline",
    "build_training_pairs",
    "train_image_lr",
    "train_all_lr",
    "rank_with_params",
    "penalized_log_likelihood",
    "write_params",
    "read_params",
]

#: L2 penalty weight on (beta0, beta1); keeps the optimum finite when the
#: one-dimensional training pairs are linearly separable.
LR_PENALTY = 1e-4

_GRAD_TOL = 1e-8
_PARAM_SOURCES = ("ground_truth", "predicted", "constant")


class RetrievalError(ValueError):
    """Invalid ranking input (empty database, missing parameters, ...)."""


class TrainingError(ValueError):
    """Degenerate training input for a per-image logistic model."""


@dataclass(frozen=True)
class LRParams:
    """Intercept and slope of one image's logistic relevance model."""

    image_id: str
    beta0: float
    beta1: float
    source: str

    def __post_init__(self):
        if not (math.isfinite(self.beta0) and math.isfinite(self.beta1)):
            raise RetrievalError(f"image {self.image_id!r}: non-finite LR parameters")
        if self.source not in _PARAM_SOURCES:
            raise RetrievalError(f"unknown LR parameter source {self.source!r}")


@dataclass(frozen=True)
class LabeledPair:
    """A similarity score labeled 1 when both sentences describe the same
    image and 0 otherwise."""

    sim: float
    label: int

    def __post_init__(self):
        if not 0.0 <= self.sim <= 1.0:
            raise RetrievalError(f"pair similarity {self.sim} outside [0, 1]")
        if self.label not in (0, 1):
            raise RetrievalError(f"pair label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class Ranking:
    """Database ids sorted by descending relevance, ties broken by id."""

    query_id: str
    entries: tuple[tuple[str, float], ...]

    def rank_of(self, image_id: str) -> int:
        """1-indexed position of ``image_id``; raises if absent."""
        for pos, (iid, _) in enumerate(self.entries, start=1):
            if iid == image_id:
                return pos
        raise RetrievalError(f"image {image_id!r} not present in ranking {self.query_id!r}")


def sigmoid(z: float) -> float:
    # Split to avoid overflow in exp for large |z|.
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _sorted_ranking(query_id: str, scores: dict[str, float]) -> Ranking:
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return Ranking(query_id=query_id, entries=tuple(ordered))


def rank_baseline(q: Description, db: Dataset, lex: Lexicon, tfidf: TfIdfModel) -> Ranking:
    """Rank by raw similarity between the query and each reference description."""
    if len(db) == 0:
        raise RetrievalError("cannot rank an empty database")
    scores = {rec.id: sentence_similarity(q, rec.reference, lex, tfidf) for rec in db}
    return _sorted_ranking(q.image_id, scores)


def rank_with_params(
    q: Description,
    db: Dataset,
    params: Mapping[str, LRParams],
    lex: Lexicon,
    tfidf: TfIdfModel,
) -> Ranking:
    """Rank by the per-image logistic match probability
    ``sigmoid(beta0 + beta1 * sim(q, reference))``."""
    if len(db) == 0:
        raise RetrievalError("cannot rank an empty database")
    missing = [rec.id for rec in db if rec.id not in params]
    if missing:
        raise RetrievalError(f"missing LR parameters for images {missing[:5]}")
    rows = []
    for rec in db:
        p = params[rec.id]
        sim = sentence_similarity(q, rec.reference, lex, tfidf)
        z = p.beta0 + p.beta1 * sim
        rows.append((rec.id, sigmoid(z), z))
    # Relevance ties that exist only because the sigmoid saturated are
    # refined by the pre-sigmoid score (the mathematically identical order);
    # genuine ties fall back to ascending id.
    rows.sort(key=lambda row: (-row[1], -row[2], row[0]))
    return Ranking(query_id=q.image_id, entries=tuple((iid, rel) for iid, rel, _ in rows))


def _pair_rng(seed: int, image_id: str) -> np.random.Generator:
    digest = hashlib.sha256(image_id.encode("utf-8")).digest()
    return np.random.default_rng([seed, 0x5A17, int.from_bytes(digest[:8], "big")])


def build_training_pairs(
    record: ImageRecord,
    db: Dataset,
    lex: Lexicon,
    tfidf: TfIdfModel,
    seed: int,
) -> list[LabeledPair]:
    """Labeled similarity pairs for one image's logistic model.

    Positives: all C(N, 2) within-pool pairs.  Negatives: each pool sentence
    paired with ceil((N - 1) / 2) sentences sampled uniformly from a uniformly
    chosen other image, never repeating a (sentence, partner) combination.
    """
    others = [rec for rec in db if rec.id != record.id]
    if not others:
        raise RetrievalError("negative pairs need a database with at least 2 images")
    pairs = [
        LabeledPair(sim=sentence_similarity(a, b, lex, tfidf), label=1)
        for a, b in combinations(record.pool, 2)
    ]
    n = record.pool_size
    per_sentence = math.ceil((n - 1) / 2)
    rng = _pair_rng(seed, record.id)
    for sentence in record.pool:
        used: set[tuple[str, int]] = set()
        while len(used) < per_sentence:
            other = others[int(rng.integers(len(others)))]
            idx = int(rng.integers(other.pool_size))
            key = (other.id, idx)
            if key in used:
                continue
            used.add(key)
            sim = sentence_similarity(sentence, other.pool[idx], lex, tfidf)
            pairs.append(LabeledPair(sim=sim, label=0))
    return pairs


def penalized_log_likelihood(
    pairs: Sequence[LabeledPair], beta0: float, beta1: float, penalty: float = LR_PENALTY
) -> float:
    """Bernoulli log-likelihood of the pairs minus the L2 penalty term."""
    sims = np.array([p.sim for p in pairs])
    labels = np.array([p.label for p in pairs], dtype=float)
    z = beta0 + beta1 * sims
    ll = float(np.sum(labels * z - np.logaddexp(0.0, z)))
    return ll - penalty * (beta0 * beta0 + beta1 * beta1)


def train_image_lr(
    pairs: Sequence[LabeledPair], image_id: str = "", penalty: float = LR_PENALTY
) -> LRParams:
    """Fit (beta0, beta1) by Newton ascent on the penalized log-likelihood.

    Deterministic; converges to gradient norm <= 1e-8.  Raises
    :class:`TrainingError` when the pairs contain a single class.
    """
    if not pairs:
        raise TrainingError("cannot train on an empty pair list")
    labels = np.array([p.label for p in pairs], dtype=float)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == len(pairs):
        cls = "positive" if n_pos else "negative"
        raise TrainingError(
            f"training pairs contain only the {cls} class "
            f"({n_pos} positives of {len(pairs)}); both classes are required"
        )
    sims = np.array([p.sim for p in pairs])
    x = np.column_stack([np.ones(len(pairs)), sims])
    # +-1 targets keep every step exactly antisymmetric under label flips.
    t = 2.0 * labels - 1.0
    beta = np.zeros(2)

    def objective(b):
        u = t * (x @ b)
        return -float(np.sum(np.logaddexp(0.0, -u))) - penalty * float(b @ b)

    current = objective(beta)
    for _ in range(200):
        u = t * (x @ beta)
        miss = _stable_sigmoid(-u)
        grad = x.T @ (t * miss) - 2.0 * penalty * beta
        if float(np.linalg.norm(grad)) <= _GRAD_TOL:
            break
        w = miss * _stable_sigmoid(u)
        hess = (x.T * w) @ x + 2.0 * penalty * np.eye(2)  # negated Hessian, positive definite
        step = np.linalg.solve(hess, grad)
        # Step halving keeps Newton ascent monotone far from the optimum; the
        # slack is relative so float noise near the optimum cannot stall it.
        slack = 1e-12 * (1.0 + abs(current))
        scale = 1.0
        for _ in range(60):
            candidate = beta + scale * step
            value = objective(candidate)
            if value >= current - slack:
                beta = candidate
                current = value
                break
            scale *= 0.5
        else:
            raise TrainingError("logistic training failed to make progress")
    else:
        raise TrainingError("logistic training did not converge to the gradient tolerance")
    return LRParams(
        image_id=image_id, beta0=float(beta[0]), beta1=float(beta[1]), source="ground_truth"
    )


def train_all_lr(
    db: Dataset, lex: Lexicon, tfidf: TfIdfModel, seed: int
) -> dict[str, LRParams]:
    """Ground-truth LR parameters for every image of the database."""
    params = {}
    for rec in db:
        pairs = build_training_pairs(rec, db, lex, tfidf, seed)
        params[rec.id] = train_image_lr(pairs, image_id=rec.id)
    return params


def write_params(params: Mapping[str, LRParams], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "beta0", "beta1", "source"])
        for image_id in sorted(params):
            p = params[image_id]
            writer.writerow([p.image_id, repr(p.beta0), repr(p.beta1), p.source])


def read_params(path) -> dict[str, LRParams]:
    params = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            p = LRParams(
                image_id=row["image_id"],
                beta0=float(row["beta0"]),
                beta1=float(row["beta1"]),
                source=row["source"],
            )
            params[p.image_id] = p
    return params
