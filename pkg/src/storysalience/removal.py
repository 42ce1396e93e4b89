"""Event-removal transforms applied to a single sentence.

Three variants: delete the whole sentence, replace verbs with do-forms
keyed by POS tag, or additionally collapse agent/patient argument spans
to indefinite pronouns.  All are pure functions from an annotated
sentence to replacement text plus an edit list.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import Sentence, detokenize
from .errors import MissingAnnotationError


class RemovalMethod(Enum):
    SD = "sd"
    VA = "va"
    PAA = "paa"


# Do-form for every verb POS tag that gets anonymized.  Modals (MD) are
# deliberately not in the family.
VERB_REPLACEMENTS = {
    "VB": "do",
    "VBP": "do",
    "VBZ": "does",
    "VBD": "did",
    "VBN": "done",
    "VBG": "doing",
}

AGENT_LABEL = "ARG0"
PATIENT_LABEL = "ARG1"
SPAN_REPLACEMENTS = {AGENT_LABEL: "someone", PATIENT_LABEL: "something"}


@dataclass(frozen=True)
class Edit:
    """One replaced token range; token indices are inclusive."""
    start_token: int
    end_token: int
    original: str
    replacement: str


@dataclass(frozen=True)
class RemovalResult:
    replacement_text: str
    edits: tuple[Edit, ...]


def _capitalize(word: str) -> str:
    return word[0].upper() + word[1:]


def remove_events(sentence: Sentence, method: RemovalMethod) -> RemovalResult:
    """Apply one removal transform; the sentence itself is never mutated.

    A replacement that begins the sentence is capitalized.  Argument spans
    are processed outermost-first (start ascending, longer first); a span
    overlapping an already-replaced region is skipped, and span replacement
    wins over verb substitution inside it.
    """
    if method is RemovalMethod.SD:
        edit = Edit(0, len(sentence.tokens) - 1, sentence.raw_text, "")
        return RemovalResult("", (edit,))

    for tok in sentence.tokens:
        if not tok.pos:
            raise MissingAnnotationError(
                f"token {tok.index} ({tok.surface!r}) has no POS tag; "
                f"{method.value} needs POS annotations")

    n = len(sentence.tokens)
    regions: dict[int, tuple[int, str]] = {}
    if method is RemovalMethod.PAA:
        covered: set[int] = set()
        spans = [s for s in sentence.spans if s.label in SPAN_REPLACEMENTS]
        spans.sort(key=lambda s: (s.start_token, s.start_token - s.end_token))
        for span in spans:
            indices = range(span.start_token, span.end_token + 1)
            if any(i in covered for i in indices):
                continue
            regions[span.start_token] = (span.end_token, SPAN_REPLACEMENTS[span.label])
            covered.update(indices)

    chunks: list[str] = []
    edits: list[Edit] = []
    i = 0
    while i < n:
        if i in regions:
            end, word = regions[i]
            if i == 0:
                word = _capitalize(word)
            edits.append(Edit(i, end, detokenize(sentence.tokens[i:end + 1]), word))
            chunks.append(word)
            i = end + 1
            continue
        tok = sentence.tokens[i]
        word = VERB_REPLACEMENTS.get(tok.pos)
        if word is not None:
            if i == 0:
                word = _capitalize(word)
            edits.append(Edit(i, i, tok.surface, word))
            chunks.append(word)
        else:
            chunks.append(tok.surface)
        i += 1

    return RemovalResult(" ".join(chunks), tuple(edits))
