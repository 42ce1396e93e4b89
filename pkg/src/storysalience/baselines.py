"""Reference baselines (random, position, tf-idf) and score combination."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Corpus, Story

BASELINE_NAMES = ("random", "pos-asc", "pos-desc", "tfidf")


@dataclass(frozen=True)
class BaselineMethod:
    name: str
    seed: int | None = None

    def __post_init__(self):
        if self.name not in BASELINE_NAMES:
            raise ValueError(f"unknown baseline {self.name!r}; choose from {BASELINE_NAMES}")
        if self.name == "random" and self.seed is None:
            raise ValueError("the random baseline needs an explicit seed")


@dataclass(frozen=True)
class TfIdfModel:
    """Story-level document frequencies: df maps lowercased word -> story count."""
    doc_freq: Mapping[str, int]
    story_count: int


def _story_words(story: Story) -> list[str]:
    return [t.surface.lower() for s in story.sentences for t in s.tokens]


def fit_tfidf(corpus: Corpus) -> TfIdfModel:
    df: dict[str, int] = {}
    for story in corpus.stories:
        for w in set(_story_words(story)):
            df[w] = df.get(w, 0) + 1
    return TfIdfModel(doc_freq=df, story_count=len(corpus.stories))


def tfidf_scores(story: Story, model: TfIdfModel) -> list[float]:
    """Sentence score = sum over its words of tf(word, story) * log(N / df).

    tf is the raw count within the whole story.  A word unseen when the
    model was fitted is treated as occurring in every story (idf 0).
    """
    tf: dict[str, int] = {}
    for w in _story_words(story):
        tf[w] = tf.get(w, 0) + 1
    n = model.story_count
    scores = []
    for sentence in story.sentences:
        total = 0.0
        for tok in sentence.tokens:
            w = tok.surface.lower()
            df = model.doc_freq.get(w, n)
            total += tf[w] * math.log(n / df)
        scores.append(total)
    return scores


def random_scores(story: Story, seed: int) -> list[float]:
    """Uniform [0, 1) per sentence, reproducible per (seed, story id)."""
    rng = random.Random(f"{seed}:{story.id}")
    return [rng.random() for _ in story.sentences]


def position_scores(story: Story, descending: bool = False) -> list[float]:
    n = len(story.sentences)
    scores = [(k + 1) / n for k in range(n)]
    if descending:
        scores = [1.0 - s for s in scores]
    return scores


def baseline_scores(story: Story, method: BaselineMethod,
                    tfidf_model: TfIdfModel | None = None) -> list[float]:
    if method.name == "random":
        return random_scores(story, method.seed)
    if method.name == "pos-asc":
        return position_scores(story)
    if method.name == "pos-desc":
        return position_scores(story, descending=True)
    if tfidf_model is None:
        raise ValueError("tfidf baseline needs a fitted TfIdfModel")
    return tfidf_scores(story, tfidf_model)


def min_max(values: Sequence[float]) -> list[float]:
    """Scale to [0, 1] within the list; a constant list maps to all zeros."""
    if not values:
        raise ValueError("cannot normalize an empty list")
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def combine_scores(a: Sequence[float], b: Sequence[float]) -> list[float]:
    """Elementwise sum of per-story min-max normalized score lists."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return [x + y for x, y in zip(min_max(a), min_max(b))]
