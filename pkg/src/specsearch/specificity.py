"""Per-image specificity: how consistently a pool of sentences describes an
image, either judged by humans (1-10 pair ratings) or computed automatically
from pairwise sentence similarity."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .corpus import Dataset, Description, HumanRating
from .lexsim import Lexicon, TfIdfModel, fit_tfidf, sentence_similarity

__all__ = [
    "SpecificityError",
    "SpecificityScore",
    "automated_specificity",
    "human_specificity",
    "specificity_histogram",
    "dataset_specificity",
    "pool_tfidf",
    "write_scores",
    "read_scores",
]


class SpecificityError(ValueError):
    """Invalid input to a specificity computation."""


@dataclass(frozen=True)
class SpecificityScore:
    image_id: str
    value: float
    source: str  # "human" or "automated"
    n_sentences: int
    n_ratings: int = 0

    def __post_init__(self):
        if self.source not in ("human", "automated"):
            raise SpecificityError(f"unknown specificity source {self.source!r}")
        if not 0.0 <= self.value <= 1.0:
            raise SpecificityError(f"specificity {self.value} outside [0, 1]")
        if self.n_sentences < 2:
            raise SpecificityError("specificity needs at least 2 sentences")


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def automated_specificity(
    pool: Sequence[Description], lex: Lexicon, tfidf: TfIdfModel
) -> SpecificityScore:
    """Mean sentence similarity over all C(N, 2) unordered pool pairs."""
    n = len(pool)
    if n < 2:
        raise SpecificityError("automated specificity needs a pool of at least 2 sentences")
    image_ids = {d.image_id for d in pool}
    if len(image_ids) != 1:
        raise SpecificityError(f"pool mixes image ids {sorted(image_ids)}")
    total = 0.0
    count = 0
    for s_a, s_b in combinations(pool, 2):
        total += sentence_similarity(s_a, s_b, lex, tfidf)
        count += 1
    return SpecificityScore(
        image_id=pool[0].image_id,
        value=_clip01(total / count),
        source="automated",
        n_sentences=n,
        n_ratings=0,
    )


def human_specificity(ratings: Sequence[HumanRating]) -> SpecificityScore:
    """Average of ratings rescaled from the 1-10 scale to [0, 1].

    Averages over whatever ratings exist; a complete M x C(N, 2) grid is not
    required.
    """
    if not ratings:
        raise SpecificityError("human specificity needs at least one rating")
    image_ids = {r.image_id for r in ratings}
    if len(image_ids) != 1:
        raise SpecificityError(f"ratings mix image ids {sorted(image_ids)}")
    value = sum((r.rating - 1) / 9.0 for r in ratings) / len(ratings)
    indices = {i for r in ratings for i in r.pair}
    return SpecificityScore(
        image_id=ratings[0].image_id,
        value=_clip01(value),
        source="human",
        n_sentences=len(indices),
        n_ratings=len(ratings),
    )


def specificity_histogram(
    scores: Iterable[SpecificityScore], n_bins: int
) -> list[tuple[tuple[float, float], int]]:
    """Counts over equal-width bins of [0, 1]; the last bin is right-inclusive."""
    if n_bins < 1:
        raise SpecificityError(f"n_bins must be >= 1, got {n_bins}")
    counts = [0] * n_bins
    for score in scores:
        idx = min(int(score.value * n_bins), n_bins - 1)
        counts[idx] += 1
    return [((i / n_bins, (i + 1) / n_bins), counts[i]) for i in range(n_bins)]


def pool_tfidf(db: Dataset) -> TfIdfModel:
    """TF-IDF model fitted on every pool description of the dataset."""
    docs = [list(d.tokens) for rec in db for d in rec.pool]
    return fit_tfidf(docs)


def dataset_specificity(
    db: Dataset, lex: Lexicon, tfidf: TfIdfModel | None = None
) -> list[SpecificityScore]:
    """Automated specificity for every image, in dataset order."""
    if tfidf is None:
        tfidf = pool_tfidf(db)
    return [automated_specificity(list(rec.pool), lex, tfidf) for rec in db]


def write_scores(scores: Sequence[SpecificityScore], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "value", "source", "n_sentences", "n_ratings"])
        for s in scores:
            writer.writerow([s.image_id, repr(s.value), s.source, s.n_sentences, s.n_ratings])


def read_scores(path) -> list[SpecificityScore]:
    scores = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            scores.append(
                SpecificityScore(
                    image_id=row["image_id"],
                    value=float(row["value"]),
                    source=row["source"],
                    n_sentences=int(row["n_sentences"]),
                    n_ratings=int(row["n_ratings"]),
                )
            )
    return scores
