"""Dataset ingestion, validation and persistence.

A dataset is a JSONL file with one image record per line:

    {"id": str, "reference": str, "descriptions": [str, ...],
     "features": [num, ...] (optional), "annotations": {str: num} (optional)}

Human similarity ratings live in a CSV with header
``image_id,idx_a,idx_b,subject,rating``.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lexsim import tokenize

__all__ = [
    "DatasetError",
    "RatingsError",
    "Description",
    "ImageRecord",
    "Dataset",
    "HumanRating",
    "load_dataset",
    "write_dataset",
    "load_ratings",
    "split_pool",
]


class DatasetError(ValueError):
    """Malformed or inconsistent dataset content."""


class RatingsError(ValueError):
    """Malformed or out-of-bounds human rating content."""


@dataclass(frozen=True)
class Description:
    """One human sentence about an image; tokens are derived once from the text."""

    image_id: str
    text: str
    tokens: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not self.text:
            raise DatasetError(f"image {self.image_id!r}: description text must be non-empty")
        object.__setattr__(self, "tokens", tuple(tokenize(self.text)))


@dataclass(frozen=True)
class ImageRecord:
    """A database image: reference description, training pool, optional
    feature vector and optional named annotations."""

    id: str
    reference: Description
    pool: tuple[Description, ...]
    features: tuple[float, ...] | None = None
    annotations: dict[str, float] | None = None

    def __post_init__(self):
        if self.reference.image_id != self.id:
            raise DatasetError(
                f"image {self.id!r}: reference carries id {self.reference.image_id!r}"
            )
        if len(self.pool) < 2:
            raise DatasetError(f"image {self.id!r}: pool must hold at least 2 descriptions")
        for desc in self.pool:
            if desc.image_id != self.id:
                raise DatasetError(
                    f"image {self.id!r}: pool description carries id {desc.image_id!r}"
                )

    @property
    def pool_size(self) -> int:
        return len(self.pool)


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of image records with a uniform pool size."""

    name: str = field(compare=False)
    images: tuple[ImageRecord, ...]
    feature_dim: int | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for rec in self.images:
            if rec.id in seen:
                raise DatasetError(f"duplicate image id {rec.id!r}")
            seen.add(rec.id)
        sizes = {rec.pool_size for rec in self.images}
        if len(sizes) > 1:
            raise DatasetError(f"pool sizes must be uniform, found {sorted(sizes)}")
        dim = self.feature_dim
        for rec in self.images:
            if rec.features is None:
                continue
            if dim is None:
                dim = len(rec.features)
            elif len(rec.features) != dim:
                raise DatasetError(
                    f"image {rec.id!r}: feature length {len(rec.features)} != declared {dim}"
                )
        if dim != self.feature_dim:
            object.__setattr__(self, "feature_dim", dim)

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    @property
    def pool_size(self) -> int:
        if not self.images:
            raise DatasetError("empty dataset has no pool size")
        return self.images[0].pool_size

    def get(self, image_id: str) -> ImageRecord:
        rec = self._index().get(image_id)
        if rec is None:
            raise KeyError(image_id)
        return rec

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._index()

    def _index(self) -> dict[str, ImageRecord]:
        index = self.__dict__.get("_id_index")
        if index is None:
            index = {rec.id: rec for rec in self.images}
            object.__setattr__(self, "_id_index", index)
        return index


@dataclass(frozen=True)
class HumanRating:
    """One subject's 1-10 similarity judgement of a pool sentence pair.

    The index pair is unordered and normalized so that ``pair[0] < pair[1]``.
    """

    image_id: str
    pair: tuple[int, int]
    subject: str
    rating: int

    def __post_init__(self):
        a, b = self.pair
        if a == b:
            raise RatingsError(f"image {self.image_id!r}: pair indices must differ, got ({a}, {b})")
        if a < 0 or b < 0:
            raise RatingsError(f"image {self.image_id!r}: pair indices must be non-negative")
        if a > b:
            object.__setattr__(self, "pair", (b, a))
        if not (1 <= self.rating <= 10):
            raise RatingsError(
                f"image {self.image_id!r}: rating {self.rating} outside the 1-10 scale"
            )


def _parse_record(rec: dict, where: str) -> ImageRecord:
    for key in ("id", "reference", "descriptions"):
        if key not in rec:
            raise DatasetError(f"{where}: record is missing {key!r}")
    image_id = str(rec["id"])
    if not isinstance(rec["descriptions"], list) or not rec["descriptions"]:
        raise DatasetError(f"{where}: 'descriptions' must be a non-empty list")
    try:
        reference = Description(image_id=image_id, text=str(rec["reference"]))
        pool = tuple(Description(image_id=image_id, text=str(s)) for s in rec["descriptions"])
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from exc
    features = None
    if rec.get("features") is not None:
        if not isinstance(rec["features"], list):
            raise DatasetError(f"{where}: 'features' must be a list of numbers")
        try:
            features = tuple(float(v) for v in rec["features"])
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{where}: 'features' must be a list of numbers") from exc
    annotations = None
    if rec.get("annotations") is not None:
        if not isinstance(rec["annotations"], dict):
            raise DatasetError(f"{where}: 'annotations' must be an object")
        try:
            annotations = {str(k): float(v) for k, v in rec["annotations"].items()}
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{where}: annotation values must be numbers") from exc
    try:
        return ImageRecord(
            id=image_id, reference=reference, pool=pool, features=features, annotations=annotations
        )
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from exc


def load_dataset(path, format: str = "jsonl") -> Dataset:
    """Load and validate a dataset file.

    Raises :class:`DatasetError` with the offending line number for malformed
    records, duplicate ids, pools smaller than 2 or inconsistent feature
    lengths.
    """
    if format != "jsonl":
        raise DatasetError(f"unknown dataset format {format!r}")
    records: list[ImageRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise DatasetError(f"{where}: record must be a JSON object")
            records.append(_parse_record(rec, where))
    return Dataset(name=Path(path).stem, images=tuple(records))


def write_dataset(dataset: Dataset, path) -> None:
    """Persist a dataset in its canonical JSONL form (lossless round-trip)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in dataset.images:
            out = {
                "id": rec.id,
                "reference": rec.reference.text,
                "descriptions": [d.text for d in rec.pool],
            }
            if rec.features is not None:
                out["features"] = list(rec.features)
            if rec.annotations is not None:
                out["annotations"] = rec.annotations
            fh.write(json.dumps(out, ensure_ascii=False) + "\n")


def load_ratings(path, dataset: Dataset | None = None) -> list[HumanRating]:
    """Load human similarity ratings from CSV.

    When ``dataset`` is given, image ids must exist in it and pair indices
    must fall inside its pool size.
    """
    ratings: list[HumanRating] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"image_id", "idx_a", "idx_b", "subject", "rating"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise RatingsError(f"{path}: header must contain {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            try:
                image_id = row["image_id"]
                a = int(row["idx_a"])
                b = int(row["idx_b"])
                subject = row["subject"]
                rating = int(row["rating"])
            except (TypeError, ValueError) as exc:
                raise RatingsError(f"{where}: malformed row ({exc})") from exc
            try:
                parsed = HumanRating(image_id=image_id, pair=(a, b), subject=subject, rating=rating)
            except RatingsError as exc:
                raise RatingsError(f"{where}: {exc}") from exc
            if dataset is not None:
                if image_id not in dataset:
                    raise RatingsError(f"{where}: unknown image id {image_id!r}")
                n = dataset.get(image_id).pool_size
                if parsed.pair[1] >= n:
                    raise RatingsError(
                        f"{where}: pair {parsed.pair} outside pool of size {n}"
                    )
            ratings.append(parsed)
    return ratings


def _record_rng(seed: int, image_id: str) -> np.random.Generator:
    # Stable across processes; hash() is salted and unusable here.
    digest = hashlib.sha256(image_id.encode("utf-8")).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:8], "big")])


def split_pool(
    record: ImageRecord, n_train: int, seed: int
) -> tuple[list[Description], list[Description]]:
    """Deterministically partition a record's pool into train and held-out parts.

    The split is a function of ``(seed, record.id)`` only; the two parts are
    disjoint and together exhaust the pool.
    """
    n = record.pool_size
    if not 0 < n_train <= n:
        raise DatasetError(
            f"image {record.id!r}: n_train must be in [1, {n}], got {n_train}"
        )
    perm = _record_rng(seed, record.id).permutation(n)
    train_idx = sorted(perm[:n_train].tolist())
    held_idx = sorted(perm[n_train:].tolist())
    return [record.pool[i] for i in train_idx], [record.pool[i] for i in held_idx]
