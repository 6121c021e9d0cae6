"""Lexical similarity machinery: tokenization, synset taxonomy, TF-IDF and
the weighted sentence-similarity measure used throughout the package.

A :class:`Lexicon` is a POS-agnostic synset graph loaded from a JSONL file.
Word-to-word similarity is the best shortest-path similarity between any two
senses of the words; sentence similarity averages per-word best matches,
weighted by TF-IDF importance, and is always within [0, 1].
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter, deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

if TYPE_CHECKING:
    from .corpus import Description

__all__ = [
    "LexiconError",
    "Synset",
    "Lexicon",
    "TfIdfModel",
    "tokenize",
    "load_lexicon",
    "sense_similarity",
    "word_contribution",
    "fit_tfidf",
    "sentence_similarity",
]

#: Tokens shorter than this are dropped (filters "a", "of", "in", ...).
MIN_TOKEN_LENGTH = 3

# Alphanumeric runs; [^\W_] is \w without the underscore.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class LexiconError(ValueError):
    """Structural problem in a lexicon file or an unknown synset id."""


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase alphanumeric tokens of length >= 3.

    Splits on any run of non-alphanumeric characters, preserves order and
    duplicates, and may return an empty list.
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= MIN_TOKEN_LENGTH]


@dataclass(frozen=True)
class Synset:
    """One sense node of the taxonomy: a set of synonymous lemmas plus its
    undirected taxonomy neighbors."""

    id: str
    lemmas: frozenset[str]
    neighbors: frozenset[str]


class Lexicon:
    """Immutable synset graph with a lemma index and memoized path queries.

    The neighbor relation is symmetric and self-loop free.  Distance and
    word-similarity caches only ever gain entries for fixed inputs, so
    concurrent readers are safe under the usual CPython semantics.
    """

    def __init__(self, synsets: Mapping[str, Synset]):
        lemma_index: dict[str, set[str]] = {}
        for sid, syn in synsets.items():
            if syn.id != sid:
                raise LexiconError(f"synset key {sid!r} does not match id {syn.id!r}")
            for nb in syn.neighbors:
                if nb not in synsets:
                    raise LexiconError(f"synset {sid!r} references missing neighbor {nb!r}")
                if sid not in synsets[nb].neighbors:
                    raise LexiconError(f"neighbor relation not symmetric: {sid!r} -> {nb!r}")
            for lemma in syn.lemmas:
                lemma_index.setdefault(lemma, set()).add(sid)
        self.synsets: dict[str, Synset] = dict(synsets)
        self.lemma_index: dict[str, frozenset[str]] = {
            lemma: frozenset(ids) for lemma, ids in lemma_index.items()
        }
        self._dist_cache: dict[tuple[str, str], int | None] = {}
        self._word_cache: dict[tuple[str, str], float] = {}

    def __len__(self) -> int:
        return len(self.synsets)

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.synsets

    def synsets_of(self, lemma: str) -> frozenset[str]:
        """All synset ids carrying ``lemma`` (empty when unknown)."""
        return self.lemma_index.get(lemma, frozenset())

    def path_length(self, a: str, b: str) -> int | None:
        """Unweighted shortest-path length between two synsets, or None if
        they live in different components."""
        if a not in self.synsets:
            raise LexiconError(f"unknown synset id {a!r}")
        if b not in self.synsets:
            raise LexiconError(f"unknown synset id {b!r}")
        if a == b:
            return 0
        key = (a, b) if a <= b else (b, a)
        if key in self._dist_cache:
            return self._dist_cache[key]
        dist = self._min_distance({a}, {b})
        self._dist_cache[key] = dist
        return dist

    def _min_distance(self, sources: set[str], targets: set[str]) -> int | None:
        """Multi-source BFS: smallest path length from any source to any target."""
        if sources & targets:
            return 0
        seen = set(sources)
        frontier = deque(sources)
        depth = 0
        while frontier:
            depth += 1
            for _ in range(len(frontier)):
                node = frontier.popleft()
                for nb in self.synsets[node].neighbors:
                    if nb in seen:
                        continue
                    if nb in targets:
                        return depth
                    seen.add(nb)
                    frontier.append(nb)
        return None

    def word_similarity(self, u: str, v: str) -> float:
        """Best sense-pair similarity between two words.

        Exactly equal words score 1 even without synset coverage; words
        lacking synsets otherwise score 0.
        """
        if u == v:
            return 1.0
        key = (u, v) if u <= v else (v, u)
        cached = self._word_cache.get(key)
        if cached is not None:
            return cached
        senses_u = self.lemma_index.get(u)
        senses_v = self.lemma_index.get(v)
        if not senses_u or not senses_v:
            sim = 0.0
        else:
            dist = self._min_distance(set(senses_u), set(senses_v))
            sim = 0.0 if dist is None else 1.0 / (1.0 + dist)
        self._word_cache[key] = sim
        return sim


def load_lexicon(path) -> Lexicon:
    """Load a lexicon from JSONL records ``{"id", "lemmas", "neighbors"}``.

    Neighbor edges are symmetrized (a directed edge in the file becomes
    undirected), self-loops are dropped, and every neighbor id must exist.
    """
    raw: dict[str, dict] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LexiconError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict) or "id" not in rec:
                raise LexiconError(f"{path}:{lineno}: record must be an object with an 'id'")
            sid = str(rec["id"])
            if sid in raw:
                raise LexiconError(f"{path}:{lineno}: duplicate synset id {sid!r}")
            raw[sid] = {
                "lemmas": [str(x).lower() for x in rec.get("lemmas", [])],
                "neighbors": [str(x) for x in rec.get("neighbors", [])],
            }
    neighbors: dict[str, set[str]] = {sid: set() for sid in raw}
    for sid, rec in raw.items():
        for nb in rec["neighbors"]:
            if nb not in raw:
                raise LexiconError(f"synset {sid!r} references missing neighbor {nb!r}")
            if nb == sid:
                continue
            neighbors[sid].add(nb)
            neighbors[nb].add(sid)
    synsets = {
        sid: Synset(id=sid, lemmas=frozenset(rec["lemmas"]), neighbors=frozenset(neighbors[sid]))
        for sid, rec in raw.items()
    }
    return Lexicon(synsets)


def sense_similarity(a: str, b: str, lex: Lexicon) -> float:
    """Similarity 1 / (1 + d) between two synsets, where d is the shortest
    path length over taxonomy edges; 0 when no path exists."""
    dist = lex.path_length(a, b)
    return 0.0 if dist is None else 1.0 / (1.0 + dist)


def _contribution(term: str, other_terms: Iterable[str], lex: Lexicon) -> float:
    best = 0.0
    for v in other_terms:
        if v == term:
            return 1.0
        sim = lex.word_similarity(term, v)
        if sim > best:
            best = sim
    return best


def word_contribution(u: str, s_b: "Description | Sequence[str]", lex: Lexicon) -> float:
    """Contribution of word ``u`` against sentence ``s_b``: the maximum
    similarity between ``u`` and any word of ``s_b``.

    A verbatim occurrence of ``u`` in ``s_b`` forces 1.0; a word with no
    synsets and no exact match contributes 0.0.
    """
    tokens = s_b.tokens if hasattr(s_b, "tokens") else s_b
    return _contribution(u, dict.fromkeys(tokens), lex)


@dataclass(frozen=True)
class TfIdfModel:
    """Smoothed inverse-document-frequency weights fitted on a corpus.

    ``idf(term) = ln((1 + doc_count) / (1 + df(term))) + 1``; terms never
    seen in the corpus fall back to ``df = 0`` under the same formula.
    """

    doc_count: int
    df: dict[str, int]
    idf: dict[str, float]

    def idf_of(self, term: str) -> float:
        got = self.idf.get(term)
        if got is not None:
            return got
        return math.log((1.0 + self.doc_count) / 1.0) + 1.0

    def weight(self, term: str, count: int) -> float:
        """Importance of a term occurring ``count`` times in one sentence."""
        return count * self.idf_of(term)


def fit_tfidf(documents: Sequence[Sequence[str]]) -> TfIdfModel:
    """Fit document frequencies over ``documents`` (token lists)."""
    if len(documents) == 0:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for doc in documents:
        df.update(set(doc))
    n = len(documents)
    idf = {term: math.log((1.0 + n) / (1.0 + d)) + 1.0 for term, d in df.items()}
    return TfIdfModel(doc_count=n, df=dict(df), idf=idf)


def _weighted_side(
    counts: Counter[str], other: Counter[str], lex: Lexicon, tfidf: TfIdfModel
) -> tuple[float, float]:
    num = 0.0
    den = 0.0
    for term, count in counts.items():
        t = tfidf.weight(term, count)
        num += t * _contribution(term, other.keys(), lex)
        den += t
    return num, den


def sentence_similarity(
    s_a: "Description | Sequence[str]",
    s_b: "Description | Sequence[str]",
    lex: Lexicon,
    tfidf: TfIdfModel,
) -> float:
    """Importance-weighted average of per-word best matches between two
    sentences.

    Symmetric, bounded in [0, 1], equal to 1 for identical non-empty
    sentences and 0 when both token lists are empty.
    """
    tokens_a = s_a.tokens if hasattr(s_a, "tokens") else s_a
    tokens_b = s_b.tokens if hasattr(s_b, "tokens") else s_b
    counts_a = Counter(tokens_a)
    counts_b = Counter(tokens_b)
    num_a, den_a = _weighted_side(counts_a, counts_b, lex, tfidf)
    num_b, den_b = _weighted_side(counts_b, counts_a, lex, tfidf)
    den = den_a + den_b
    if den == 0.0:
        return 0.0
    sim = (num_a + num_b) / den
    # Guard against float round-off at the boundaries only.
    if sim < 0.0:
        return 0.0
    if sim > 1.0:
        return 1.0
    # The measure's resolution: summation-order noise below 1e-12 would
    # otherwise make mathematically equal similarities compare unequal.
    return round(sim, 12)
