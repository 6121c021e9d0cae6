import pytest

from specsearch.corpus import Dataset, Description, ImageRecord
from specsearch.lexsim import Lexicon, Synset, fit_tfidf


@pytest.fixture
def chain_lexicon():
    """dog -- canine -- feline chain; cat sits on feline; bird isolated."""
    return Lexicon(
        {
            "dog.n": Synset("dog.n", frozenset({"dog"}), frozenset({"canine.n"})),
            "canine.n": Synset(
                "canine.n", frozenset({"canine"}), frozenset({"dog.n", "feline.n"})
            ),
            "feline.n": Synset("feline.n", frozenset({"feline", "cat"}), frozenset({"canine.n"})),
            "bird.n": Synset("bird.n", frozenset({"bird"}), frozenset()),
        }
    )


@pytest.fixture
def empty_lexicon():
    return Lexicon({})


def make_record(image_id, reference, sentences, features=None, annotations=None):
    return ImageRecord(
        id=image_id,
        reference=Description(image_id=image_id, text=reference),
        pool=tuple(Description(image_id=image_id, text=s) for s in sentences),
        features=features,
        annotations=annotations,
    )


@pytest.fixture
def tiny_dataset():
    records = (
        make_record("a", "the dog runs fast", ["dog runs", "the dog walks", "dog running fast"]),
        make_record("b", "bird flies high", ["the bird sings", "bird flying", "bird flies away"]),
    )
    return Dataset(name="tiny", images=records)


@pytest.fixture
def tiny_tfidf(tiny_dataset):
    return fit_tfidf([list(d.tokens) for rec in tiny_dataset for d in rec.pool])
