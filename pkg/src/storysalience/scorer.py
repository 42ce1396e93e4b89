"""Coherence scorers: per-token log-likelihoods under a left-to-right model.

Two implementations share one interface: a deterministic interpolated
trigram LM that keeps the test suite hermetic, and an HTTP client for a
neural sidecar speaking the /info + /score wire protocol.  All log
probabilities are natural logs.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import CorpusParseError, ProtocolError, TransportError

UNK = "<unk>"
BOS = "<s>"
EOT = "<eot>"

# Words plus single punctuation marks; whitespace is never part of a token.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class ScoredToken:
    text: str
    logprob: float
    start: int
    end: int


@dataclass(frozen=True)
class ScoredText:
    tokens: tuple[ScoredToken, ...]
    eot_logprob: float | None = None

    @property
    def total_logprob(self) -> float:
        return sum(t.logprob for t in self.tokens)


def check_scored_text(scored: ScoredText, text: str) -> None:
    """Verify offset invariants: ordered, non-overlapping, reconstructing the input."""
    prev_end = 0
    for tok in scored.tokens:
        if not (0 <= tok.start <= tok.end <= len(text)):
            raise ProtocolError(f"token offsets [{tok.start}, {tok.end}) outside input")
        if tok.start < prev_end:
            raise ProtocolError(f"token offsets overlap at {tok.start}")
        if text[tok.start:tok.end] != tok.text:
            raise ProtocolError(
                f"token text {tok.text!r} does not match input slice "
                f"{text[tok.start:tok.end]!r}")
        if text[prev_end:tok.start].strip():
            raise ProtocolError(f"non-whitespace gap before offset {tok.start}")
        if tok.logprob > 0.0:
            raise ProtocolError(f"positive log-probability {tok.logprob} for {tok.text!r}")
        prev_end = tok.end
    if text[prev_end:].strip():
        raise ProtocolError("non-whitespace tail after the last token")
    if scored.eot_logprob is not None and scored.eot_logprob > 0.0:
        raise ProtocolError(f"positive end-of-text log-probability {scored.eot_logprob}")


class CoherenceScorer(ABC):
    """Deterministic provider of token log-likelihoods for a text."""

    eot_token: str = EOT

    @property
    @abstractmethod
    def max_input_length(self) -> int:
        """Input budget L, in this scorer's own tokens."""

    @abstractmethod
    def score(self, text: str, include_eot: bool = True) -> ScoredText:
        """Score text left to right; identical input yields identical output."""


def tokenize(text: str) -> list[str]:
    """Lowercased whitespace-plus-punctuation tokens (the n-gram LM's unit)."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


class NGramLM(CoherenceScorer):
    """Interpolated n-gram LM with add-one smoothing at the unigram level.

    Conditional probabilities mix maximum-likelihood estimates of orders
    1..order with fixed weights; an unseen context falls back to the next
    lower order so every conditional distribution stays normalized.
    """

    def __init__(self, order, lambdas, vocab, counts, context_totals=None,
                 max_input_length=1024):
        if order < 1:
            raise ValueError("order must be >= 1")
        if len(lambdas) != order:
            raise ValueError(f"need {order} interpolation weights, got {len(lambdas)}")
        if any(l < 0 for l in lambdas) or abs(sum(lambdas) - 1.0) > 1e-9:
            raise ValueError("interpolation weights must be nonnegative and sum to 1")
        self.order = order
        self.lambdas = tuple(float(l) for l in lambdas)
        self.vocab = frozenset(vocab)
        self.counts = counts
        if context_totals is None:
            context_totals = [None] * (order + 1)
            for k in range(1, order + 1):
                totals: dict[tuple, int] = {}
                for gram, c in counts[k].items():
                    totals[gram[:-1]] = totals.get(gram[:-1], 0) + c
                context_totals[k] = totals
        self._context_totals = context_totals
        self._max_input_length = int(max_input_length)
        self._n_events = self._context_totals[1].get((), 0)

    @classmethod
    def train(cls, documents, order=3, min_count=2, lambdas=(0.5, 0.3, 0.2),
              max_input_length=1024):
        """Count n-grams over tokenized documents; rare words collapse to <unk>.

        Each document is terminated by the end-of-text event and padded
        on the left with start symbols, so the model can score <eot>
        after any context.
        """
        docs = [tokenize(d) for d in documents]
        docs = [d for d in docs if d]
        if not docs:
            raise ValueError("training corpus is empty")
        raw = {}
        for doc in docs:
            for w in doc:
                raw[w] = raw.get(w, 0) + 1
        vocab = {w for w, c in raw.items() if c >= min_count}
        vocab.update((UNK, EOT))
        counts: list[dict | None] = [None] + [dict() for _ in range(order)]
        for doc in docs:
            events = [w if w in vocab else UNK for w in doc] + [EOT]
            padded = [BOS] * (order - 1) + events
            for i in range(order - 1, len(padded)):
                for k in range(1, order + 1):
                    gram = tuple(padded[i - k + 1:i + 1])
                    counts[k][gram] = counts[k].get(gram, 0) + 1
        return cls(order=order, lambdas=lambdas, vocab=vocab, counts=counts,
                   max_input_length=max_input_length)

    @property
    def max_input_length(self) -> int:
        return self._max_input_length

    def prob(self, word: str, context: tuple[str, ...]) -> float:
        """P(word | context) for a model-vocabulary word (use <unk> for OOV)."""
        p = (self.counts[1].get((word,), 0) + 1) / (self._n_events + len(self.vocab))
        total = self.lambdas[0] * p
        for k in range(2, self.order + 1):
            ctx = tuple(context[-(k - 1):]) if k > 1 else ()
            denom = self._context_totals[k].get(ctx)
            if denom:
                p = self.counts[k].get(ctx + (word,), 0) / denom
            # else: unseen context, keep the lower-order estimate
            total += self.lambdas[k - 1] * p
        return total

    def _lookup(self, word: str) -> str:
        return word if word in self.vocab else UNK

    def score(self, text: str, include_eot: bool = True) -> ScoredText:
        context = (BOS,) * (self.order - 1)
        tokens = []
        for m in _TOKEN_RE.finditer(text):
            word = self._lookup(m.group(0).lower())
            lp = math.log(self.prob(word, context))
            tokens.append(ScoredToken(text=m.group(0), logprob=lp,
                                      start=m.start(), end=m.end()))
            context = (context + (word,))[-(self.order - 1):] if self.order > 1 else ()
        eot_lp = math.log(self.prob(EOT, context)) if include_eot else None
        return ScoredText(tokens=tuple(tokens), eot_logprob=eot_lp)

    def to_dict(self) -> dict:
        return {
            "format": "ngram-v1",
            "order": self.order,
            "lambda": list(self.lambdas),
            "max_input_length": self._max_input_length,
            "vocab": sorted(self.vocab),
            "counts": {
                str(k): {" ".join(gram): c for gram, c in sorted(self.counts[k].items())}
                for k in range(1, self.order + 1)
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NGramLM":
        if data.get("format") != "ngram-v1":
            raise CorpusParseError(f"unsupported model format {data.get('format')!r}")
        order = int(data["order"])
        counts: list[dict | None] = [None] + [dict() for _ in range(order)]
        for k_str, table in data["counts"].items():
            k = int(k_str)
            counts[k] = {tuple(gram.split(" ")): int(c) for gram, c in table.items()}
        return cls(order=order, lambdas=tuple(data["lambda"]), vocab=set(data["vocab"]),
                   counts=counts, max_input_length=int(data.get("max_input_length", 1024)))


def save_ngram_model(model: NGramLM, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), ensure_ascii=False), encoding="utf-8")


def load_ngram_model(path) -> NGramLM:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorpusParseError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return NGramLM.from_dict(data)


class RemoteScorer(CoherenceScorer):
    """Client for the neural sidecar's GET /info + POST /score protocol.

    Responses are validated against the ScoredText invariants and cached
    by content within the lifetime of this object.  Transport failures are
    retried a bounded number of times before raising TransportError.
    """

    def __init__(self, endpoint: str, retries: int = 3, timeout: float = 60.0,
                 session=None):
        self.endpoint = endpoint.rstrip("/")
        self.retries = int(retries)
        self.timeout = timeout
        self._session = session if session is not None else requests.Session()
        self._cache: dict[str, ScoredText] = {}
        info = self._request("GET", "/info")
        try:
            self.model_name = str(info["model"])
            self._max_input_length = int(info["max_input_length"])
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"malformed /info response: {info!r}") from e
        self.eot_token = "<|endoftext|>"

    @property
    def max_input_length(self) -> int:
        return self._max_input_length

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = self.endpoint + path
        last_error = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._session.request(method, url, json=body, timeout=self.timeout)
            except requests.RequestException as e:
                last_error = e
                if attempt < self.retries:
                    time.sleep(min(0.1 * 2 ** attempt, 2.0))
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"{url} returned {resp.status_code}")
                if attempt < self.retries:
                    time.sleep(min(0.1 * 2 ** attempt, 2.0))
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as e:
                raise ProtocolError(f"{url} returned non-JSON body") from e
        raise TransportError(
            f"{url} unreachable after {self.retries + 1} attempts: {last_error}")

    @staticmethod
    def _cache_key(text: str, include_eot: bool) -> str:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return f"{int(include_eot)}:{digest}"

    def score(self, text: str, include_eot: bool = True) -> ScoredText:
        key = self._cache_key(text, include_eot)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        data = self._request("POST", "/score", {"text": text, "include_eot": include_eot})
        try:
            tokens = tuple(
                ScoredToken(text=str(t["text"]), logprob=float(t["logprob"]),
                            start=int(t["start"]), end=int(t["end"]))
                for t in data["tokens"])
            eot = data.get("eot_logprob")
            scored = ScoredText(tokens=tokens,
                                eot_logprob=None if eot is None else float(eot))
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"malformed /score response: {e}") from e
        if include_eot and scored.eot_logprob is None:
            raise ProtocolError("missing eot_logprob in /score response")
        check_scored_text(scored, text)
        self._cache[key] = scored
        return scored


def perplexity(scorer: CoherenceScorer, corpus) -> float:
    """exp(-mean token log-likelihood) over every story scored as one sequence.

    Stories longer than the scorer's input budget are split into windows of
    whole sentences; the end-of-text probability counts once per story.
    """
    from .salience import sequence_logprob  # deferred: salience owns windowing

    total = 0.0
    count = 0
    for story in corpus.stories:
        texts = [s.raw_text for s in story.sentences]
        lp, n = sequence_logprob(texts, scorer, include_eot=True)
        total += lp
        count += n
    return math.exp(-total / count)
