"""In-memory model for goal-oriented dialogs shared by both corpus formats.

A dialog is an ordered list of speaker-tagged turns. Turns alternate
user/agent starting with the user; both supported corpora are strict
user-initiative exchanges. Every turn carries an origin: it is either part
of the source corpus or was injected by a named conversation pattern.
Knowledge-base facts are context, not turns, so they live in a separate
record attached to the dialog.

All types are immutable values after construction and safe to share
between workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class Speaker(str, Enum):
    USER = "user"
    AGENT = "agent"

    def other(self) -> "Speaker":
        return Speaker.AGENT if self is Speaker.USER else Speaker.USER


#: Dialog domains across both corpora. bAbI dialogs are all `restaurant`.
DOMAINS = ("schedule", "weather", "navigate", "restaurant")


class ModelError(ValueError):
    """Invalid dialog structure or invalid operation input."""


_WS_RUN = re.compile(r"\s+")


def normalize_entity(s: str) -> str:
    """Canonical entity form: lowercase, trimmed, whitespace runs -> '_'.

    Idempotent. Raises ModelError on empty input.
    """
    if not s:
        raise ModelError("empty entity")
    out = _WS_RUN.sub("_", s.strip().lower())
    if not out:
        raise ModelError("empty entity")
    return out


def entity_display(canonical: str) -> str:
    """Surface form used when an entity is written into generated text."""
    return canonical.replace("_", " ")


# Punctuation stripped from token edges when matching entities in free text.
_EDGE_PUNCT = ".,!?;:\"'()"


def _match_tokens(text: str) -> list[str]:
    """Lowercased whitespace tokens with edge punctuation stripped."""
    toks = []
    for raw in text.lower().split():
        t = raw.strip(_EDGE_PUNCT)
        toks.append(t if t else raw)
    return toks


def entity_spans(text: str, lexicon: frozenset[str] | set[str]) -> list[tuple[int, int, str]]:
    """Token-aligned lexicon matches in `text`, greedy longest-match.

    Returns (start_token, end_token_exclusive, canonical) triples in scan
    order; matched spans never overlap. Multi-token entities match when
    their tokens joined with '_' equal a lexicon member.
    """
    if not lexicon:
        return []
    toks = _match_tokens(text)
    max_len = max((e.count("_") + 1 for e in lexicon), default=1)
    spans = []
    i = 0
    n = len(toks)
    while i < n:
        hit = None
        for j in range(min(n, i + max_len), i, -1):
            cand = "_".join(toks[i:j])
            if cand in lexicon:
                hit = (i, j, cand)
                break
        if hit:
            spans.append(hit)
            i = hit[1]
        else:
            i += 1
    return spans


def entities_in(text: str, lexicon: frozenset[str] | set[str]) -> set[str]:
    """Set of lexicon entities occurring in `text` (canonical forms)."""
    return {c for _, _, c in entity_spans(text, lexicon)}


@dataclass(frozen=True)
class Turn:
    """One utterance. `injected_by` is None for source-corpus turns,
    otherwise the name of the pattern that introduced the turn."""

    speaker: Speaker
    text: str
    injected_by: str | None = None
    annotations: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.text:
            raise ModelError("empty utterance")
        if "\n" in self.text or "\r" in self.text:
            raise ModelError("utterance contains line break")

    @property
    def is_original(self) -> bool:
        return self.injected_by is None

    def annotation_map(self) -> dict[str, str]:
        return dict(self.annotations)

    def slots(self) -> dict[str, str]:
        """Slot annotations, keyed by slot name (the `slot:` prefix dropped)."""
        return {k[5:]: v for k, v in self.annotations if k.startswith("slot:")}


@dataclass(frozen=True)
class KbRecord:
    """Per-dialog knowledge base as (subject, attribute, value) triples.

    All three components are canonical entity strings.
    """

    entries: tuple[tuple[str, str, str], ...] = ()

    def values_for(self, attribute: str) -> list[str]:
        """Distinct values of `attribute`, in KB order."""
        seen, out = set(), []
        for _, attr, val in self.entries:
            if attr == attribute and val not in seen:
                seen.add(val)
                out.append(val)
        return out

    def attributes_of(self, value: str) -> list[str]:
        """Attributes under which `value` appears (subject hits -> 'subject')."""
        out = []
        for subj, attr, val in self.entries:
            if val == value and attr not in out:
                out.append(attr)
            if subj == value and "subject" not in out:
                out.append("subject")
        return out

    def subjects(self) -> list[str]:
        seen, out = set(), []
        for subj, _, _ in self.entries:
            if subj not in seen:
                seen.add(subj)
                out.append(subj)
        return out

    def all_entities(self) -> set[str]:
        ents = set()
        for subj, _, val in self.entries:
            ents.add(subj)
            ents.add(val)
        return ents


@dataclass(frozen=True)
class Dialog:
    id: str
    domain: str
    turns: tuple[Turn, ...]
    kb: KbRecord = KbRecord()
    # Format-specific payload needed for lossless serialization:
    #  babi -> tuple of (subject, attribute, value, agent_ordinal) raw KB rows,
    #          where agent_ordinal is the 0-based ordinal (among original agent
    #          turns) of the agent turn the KB block precedes.
    #  smd  -> canonicalized JSON string of the source scenario object.
    source_info: tuple = ()

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ModelError(f"unknown domain {self.domain!r} in dialog {self.id}")
        _check_alternation(self.turns, self.id)
        originals = tuple(t for t in self.turns if t.is_original)
        _check_alternation(originals, self.id + " (original subsequence)")

    @property
    def applied_patterns(self) -> frozenset[str]:
        return frozenset(t.injected_by for t in self.turns if t.injected_by)

    def original_turns(self) -> tuple[Turn, ...]:
        return tuple(t for t in self.turns if t.is_original)

    def entity_lexicon(self) -> set[str]:
        return self.kb.all_entities()


def _check_alternation(turns: tuple[Turn, ...], label: str) -> None:
    if not turns:
        return
    if turns[0].speaker is not Speaker.USER:
        raise ModelError(f"dialog {label}: first turn must be the user")
    for i in range(1, len(turns)):
        if turns[i].speaker is turns[i - 1].speaker:
            raise ModelError(f"dialog {label}: turns {i - 1} and {i} share a speaker")


@dataclass(frozen=True)
class DialogCorpus:
    dialogs: tuple[Dialog, ...]
    source_format: str  # "babi" | "smd"
    global_entities: frozenset[str] = frozenset()
    # Exact bytes of the source file, kept so an untouched corpus can be
    # re-serialized byte-for-byte. Empty for corpora built in memory.
    # A carrier detail: not part of model equality.
    source_bytes: bytes = field(default=b"", compare=False, repr=False)

    def __post_init__(self):
        if self.source_format not in ("babi", "smd"):
            raise ModelError(f"unknown source format {self.source_format!r}")
        ids = [d.id for d in self.dialogs]
        if len(ids) != len(set(ids)):
            raise ModelError("duplicate dialog ids")

    @property
    def is_pristine(self) -> bool:
        return all(t.is_original for d in self.dialogs for t in d.turns)

    def dialog_by_id(self) -> dict[str, Dialog]:
        return {d.id: d for d in self.dialogs}

    def updated_dialogs(self) -> tuple[Dialog, ...]:
        return tuple(d for d in self.dialogs if d.applied_patterns)


def utterance_count(d: Dialog) -> int:
    """Number of utterances in a dialog; every turn is one utterance."""
    return len(d.turns)


def mean_utterances(corpus: DialogCorpus) -> float:
    if not corpus.dialogs:
        return 0.0
    return sum(utterance_count(d) for d in corpus.dialogs) / len(corpus.dialogs)


def build_global_entities(dialogs: tuple[Dialog, ...], extra: set[str] = frozenset()) -> frozenset[str]:
    ents: set[str] = set(extra)
    for d in dialogs:
        ents |= d.kb.all_entities()
    return frozenset(ents)


def content_digest(corpus: DialogCorpus) -> str:
    """Digest of the corpus content (turn texts, speakers, origins).

    Prefers the exact source bytes when available, so corpora loaded from a
    file are fingerprinted by the file itself.
    """
    import hashlib

    if corpus.source_bytes:
        return hashlib.sha256(corpus.source_bytes).hexdigest()
    payload = "\x1e".join(
        f"{d.id}|{d.domain}|"
        + "\x1f".join(f"{t.speaker.value}:{t.injected_by or ''}:{t.text}" for t in d.turns)
        for d in corpus.dialogs
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
