"""Masked-evaluation manifest and prediction alignment.

The manifest lists exactly the agent responses that are scoreable: the
ones present in the source test set. Injected agent turns never appear,
so a manifest exported before and after injection carries the same
(dialog_id, gold_text) sequence.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .babi import ParseError
from .model import Dialog, DialogCorpus, Speaker, content_digest


@dataclass(frozen=True)
class ManifestEntry:
    dialog_id: str
    turn_index: int
    gold_text: str


@dataclass(frozen=True)
class EvalManifest:
    entries: tuple[ManifestEntry, ...]
    corpus_tag: str

    def digest(self) -> str:
        return hashlib.sha256(serialize_manifest(self)).hexdigest()

    def dialog_ids(self) -> list[str]:
        seen, out = set(), []
        for e in self.entries:
            if e.dialog_id not in seen:
                seen.add(e.dialog_id)
                out.append(e.dialog_id)
        return out


@dataclass(frozen=True)
class PredictionSet:
    responses: tuple[str, ...]
    manifest_digest: str


def corpus_tag(corpus: DialogCorpus) -> str:
    return f"{corpus.source_format}:{content_digest(corpus)[:12]}"


def export_manifest(corpus: DialogCorpus) -> EvalManifest:
    """Original agent turns in corpus order; injected turns are masked out."""
    entries = []
    for d in corpus.dialogs:
        for i, t in enumerate(d.turns):
            if t.speaker is Speaker.AGENT and t.is_original:
                entries.append(ManifestEntry(d.id, i, t.text))
    return EvalManifest(entries=tuple(entries), corpus_tag=corpus_tag(corpus))


def serialize_manifest(m: EvalManifest) -> bytes:
    lines = [f"# corpus_tag={m.corpus_tag}"]
    for e in m.entries:
        lines.append(f"{e.dialog_id}\t{e.turn_index}\t{e.gold_text}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_manifest(data: bytes) -> EvalManifest:
    tag = ""
    entries = []
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if "corpus_tag=" in line:
                tag = line.split("corpus_tag=", 1)[1].strip()
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise ParseError(f"manifest line {lineno}: expected 3 tab-separated fields")
        entries.append(ManifestEntry(parts[0], int(parts[1]), parts[2]))
    return EvalManifest(entries=tuple(entries), corpus_tag=tag)


def read_predictions(data: bytes, manifest: EvalManifest) -> PredictionSet:
    """One predicted response per line, aligned to manifest order."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"predictions are not valid UTF-8 at byte {e.start}") from e
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != len(manifest.entries):
        raise ParseError(
            f"expected {len(manifest.entries)} predictions, got {len(lines)}"
        )
    return PredictionSet(responses=tuple(lines), manifest_digest=manifest.digest())


def manifest_dialogs(corpus: DialogCorpus) -> dict[str, Dialog]:
    return corpus.dialog_by_id()
