"""Rank-based evaluation: average precision, MAP, and paired statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import InsufficientDataError


@dataclass(frozen=True)
class EvalReport:
    method: str
    per_story_ap: dict[str, float]
    map: float
    significance: tuple[str, float] | None = None
    correlation: float | None = None


def average_precision(scores: Sequence[float], gold: Sequence[bool]) -> float:
    """AP of the descending-score ranking; ties broken by sentence index.

    AP = mean over gold-positive sentences of precision at that
    sentence's rank.
    """
    if len(scores) != len(gold):
        raise ValueError(f"length mismatch: {len(scores)} vs {len(gold)}")
    if not any(gold):
        raise InsufficientDataError("no gold-salient sentence: AP is undefined")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits = 0
    precisions = []
    for rank, i in enumerate(order, start=1):
        if gold[i]:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / len(precisions)


def mean_average_precision(per_story: Iterable[tuple[str, Sequence[float], Sequence[bool]]],
                           method: str = "") -> EvalReport:
    """Macro-averaged AP over stories given (story_id, scores, gold) triples.

    Stories without any gold-salient sentence cannot define AP and are
    skipped with a warning.
    """
    per_story_ap: dict[str, float] = {}
    for story_id, scores, gold in per_story:
        if not any(gold):
            warnings.warn(f"story {story_id!r} has no gold-salient sentence; "
                          f"excluded from MAP")
            continue
        per_story_ap[story_id] = average_precision(scores, gold)
    if not per_story_ap:
        raise InsufficientDataError("no story with gold-salient sentences")
    return EvalReport(method=method, per_story_ap=per_story_ap,
                      map=sum(per_story_ap.values()) / len(per_story_ap))


def _signed_ranks(x: Sequence[float], y: Sequence[float]) -> tuple[list[float], list[float]]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    diffs = [a - b for a, b in zip(x, y) if a != b]
    if len(diffs) < 5:
        raise InsufficientDataError(
            f"only {len(diffs)} nonzero differences; need at least 5")
    ranks = rankdata([abs(d) for d in diffs])
    return diffs, list(ranks)


def _exact_wilcoxon_p(ranks: Sequence[float], w_plus: float) -> float:
    # Average ranks are multiples of 1/2, so doubling makes them integers
    # and the positive-rank-sum null distribution becomes a subset-sum count.
    scaled = [round(2 * r) for r in ranks]
    total = sum(scaled)
    dist = [0] * (total + 1)
    dist[0] = 1
    for s in scaled:
        for v in range(total, s - 1, -1):
            dist[v] += dist[v - s]
    w = round(2 * w_plus)
    lo, hi = min(w, total - w), max(w, total - w)
    favorable = sum(dist[:lo + 1]) + sum(dist[hi:])
    return min(1.0, favorable / 2 ** len(ranks))


def _normal_wilcoxon_p(diffs: Sequence[float], ranks: Sequence[float],
                       w_plus: float) -> float:
    n = len(diffs)
    mean = n * (n + 1) / 4
    var = n * (n + 1) * (2 * n + 1) / 24
    _, counts = np.unique([abs(d) for d in diffs], return_counts=True)
    var -= sum(int(t) ** 3 - int(t) for t in counts) / 48
    if var <= 0:
        raise InsufficientDataError("all |differences| tied; variance is zero")
    d = w_plus - mean
    # continuity correction shrinks the statistic toward the mean
    z = (d - 0.5 * (d > 0) + 0.5 * (d < 0)) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are discarded; tied |differences| get average ranks.
    The null distribution is enumerated exactly up to n = 25 and
    approximated normally (continuity and tie corrected) beyond.
    """
    diffs, ranks = _signed_ranks(x, y)
    w_plus = sum(r for d, r in zip(diffs, ranks) if d > 0)
    if len(diffs) <= 25:
        return _exact_wilcoxon_p(ranks, w_plus)
    return _normal_wilcoxon_p(diffs, ranks, w_plus)


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InsufficientDataError("need at least 2 points for a correlation")
    if min(x) == max(x) or min(y) == max(y):
        raise InsufficientDataError("constant input: rank correlation is undefined")
    rx, ry = rankdata(x), rankdata(y)
    return float(np.corrcoef(rx, ry)[0, 1])
