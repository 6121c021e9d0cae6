import json

import pytest

from specsearch.corpus import (
    Dataset,
    DatasetError,
    Description,
    HumanRating,
    ImageRecord,
    RatingsError,
    load_dataset,
    load_ratings,
    split_pool,
    write_dataset,
)
from specsearch.lexsim import tokenize


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


GOOD_RECORDS = [
    {
        "id": "a",
        "reference": "a dog runs in the park",
        "descriptions": ["the dog runs", "dog in park", "a running dog", "dog plays", "the dog"],
        "features": [0.5, 1.5, -2.0],
        "annotations": {"person": 0.0, "memorability": 0.7},
    },
    {
        "id": "b",
        "reference": "a cat sleeps",
        "descriptions": ["cat on sofa", "sleeping cat", "the cat naps", "cat rests", "lazy cat"],
        "features": [1.0, 0.0, 3.0],
    },
]


class TestDescription:
    def test_tokens_derived_from_text(self):
        d = Description(image_id="a", text="The DOG runs!")
        assert list(d.tokens) == tokenize("The DOG runs!")

    def test_empty_text_rejected(self):
        with pytest.raises(DatasetError, match="non-empty"):
            Description(image_id="a", text="")


class TestLoadDataset:
    def test_basic_parse(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", GOOD_RECORDS)
        db = load_dataset(path)
        assert len(db) == 2
        assert db.pool_size == 5
        assert db.feature_dim == 3
        assert db.get("a").annotations["memorability"] == 0.7
        assert all(d.tokens for rec in db for d in rec.pool)

    def test_missing_reference_names_line(self, tmp_path):
        bad = [dict(GOOD_RECORDS[0])]
        del bad[0]["reference"]
        path = write_jsonl(tmp_path / "d.jsonl", bad)
        with pytest.raises(DatasetError, match=r"d\.jsonl:1.*reference"):
            load_dataset(path)

    def test_duplicate_id(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [GOOD_RECORDS[0], GOOD_RECORDS[0]])
        with pytest.raises(DatasetError, match="duplicate image id"):
            load_dataset(path)

    def test_pool_too_small(self, tmp_path):
        bad = dict(GOOD_RECORDS[0])
        bad["descriptions"] = ["only one"]
        path = write_jsonl(tmp_path / "d.jsonl", [bad])
        with pytest.raises(DatasetError, match="at least 2"):
            load_dataset(path)

    def test_inconsistent_feature_length(self, tmp_path):
        bad = dict(GOOD_RECORDS[1])
        bad["features"] = [1.0, 2.0, 3.0, 4.0]
        path = write_jsonl(tmp_path / "d.jsonl", [GOOD_RECORDS[0], bad])
        with pytest.raises(DatasetError, match="feature length"):
            load_dataset(path)

    def test_nonuniform_pool_size(self, tmp_path):
        bad = dict(GOOD_RECORDS[1])
        bad["descriptions"] = ["cat", "cat naps"]
        path = write_jsonl(tmp_path / "d.jsonl", [GOOD_RECORDS[0], bad])
        with pytest.raises(DatasetError, match="uniform"):
            load_dataset(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text(json.dumps(GOOD_RECORDS[0]) + "\n{broken\n", encoding="utf-8")
        with pytest.raises(DatasetError, match=r"d\.jsonl:2"):
            load_dataset(path)

    def test_unknown_format(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", GOOD_RECORDS)
        with pytest.raises(DatasetError, match="unknown dataset format"):
            load_dataset(path, format="parquet")

    def test_round_trip(self, tmp_path):
        original = load_dataset(write_jsonl(tmp_path / "d.jsonl", GOOD_RECORDS))
        write_dataset(original, tmp_path / "copy.jsonl")
        again = load_dataset(tmp_path / "copy.jsonl")
        assert again == original


class TestRatings:
    def _path(self, tmp_path, rows):
        path = tmp_path / "ratings.csv"
        lines = ["image_id,idx_a,idx_b,subject,rating"] + rows
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_mem5s_shaped_grid(self, tmp_path):
        rows = []
        for a in range(5):
            for b in range(a + 1, 5):
                for subject in ("s1", "s2", "s3"):
                    rows.append(f"img,{a},{b},{subject},7")
        ratings = load_ratings(self._path(tmp_path, rows))
        assert len(ratings) == 30  # C(5,2) pairs x 3 subjects

    def test_rating_out_of_range(self, tmp_path):
        with pytest.raises(RatingsError, match="1-10"):
            load_ratings(self._path(tmp_path, ["img,0,1,s1,11"]))

    def test_equal_pair_indices(self, tmp_path):
        with pytest.raises(RatingsError, match="must differ"):
            load_ratings(self._path(tmp_path, ["img,2,2,s1,5"]))

    def test_pair_normalized_unordered(self, tmp_path):
        ratings = load_ratings(self._path(tmp_path, ["img,3,1,s1,5"]))
        assert ratings[0].pair == (1, 3)

    def test_index_bounds_against_dataset(self, tmp_path):
        db = load_dataset(write_jsonl(tmp_path / "d.jsonl", GOOD_RECORDS))
        path = self._path(tmp_path, ["a,0,5,s1,5"])
        with pytest.raises(RatingsError, match="outside pool"):
            load_ratings(path, dataset=db)

    def test_unknown_image_against_dataset(self, tmp_path):
        db = load_dataset(write_jsonl(tmp_path / "d.jsonl", GOOD_RECORDS))
        path = self._path(tmp_path, ["zzz,0,1,s1,5"])
        with pytest.raises(RatingsError, match="unknown image"):
            load_ratings(path, dataset=db)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "ratings.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(RatingsError, match="header"):
            load_ratings(path)


class TestSplitPool:
    def _record(self, n):
        return ImageRecord(
            id="img",
            reference=Description(image_id="img", text="reference sentence"),
            pool=tuple(Description(image_id="img", text=f"sentence number {i}") for i in range(n)),
        )

    def test_sizes(self):
        train, held = split_pool(self._record(50), 48, seed=1)
        assert (len(train), len(held)) == (48, 2)

    def test_full_pool_boundary(self):
        train, held = split_pool(self._record(5), 5, seed=1)
        assert (len(train), len(held)) == (5, 0)

    def test_too_many_requested(self):
        with pytest.raises(DatasetError, match="n_train"):
            split_pool(self._record(5), 6, seed=1)

    def test_zero_requested(self):
        with pytest.raises(DatasetError, match="n_train"):
            split_pool(self._record(5), 0, seed=1)

    def test_reproducible_and_exhaustive(self):
        rec = self._record(10)
        first = split_pool(rec, 6, seed=42)
        second = split_pool(rec, 6, seed=42)
        assert first == second
        train, held = first
        union = sorted(d.text for d in train + held)
        assert union == sorted(d.text for d in rec.pool)
        assert not {d.text for d in train} & {d.text for d in held}

    def test_different_seeds_differ(self):
        rec = self._record(30)
        assert split_pool(rec, 15, seed=1) != split_pool(rec, 15, seed=2)


class TestRecordValidation:
    def test_pool_id_mismatch(self):
        with pytest.raises(DatasetError, match="carries id"):
            ImageRecord(
                id="a",
                reference=Description(image_id="a", text="ref sentence"),
                pool=(
                    Description(image_id="a", text="one sentence"),
                    Description(image_id="b", text="two sentence"),
                ),
            )

    def test_rating_validation(self):
        with pytest.raises(RatingsError):
            HumanRating(image_id="a", pair=(0, 1), subject="s", rating=0)
        normalized = HumanRating(image_id="a", pair=(4, 2), subject="s", rating=10)
        assert normalized.pair == (2, 4)
