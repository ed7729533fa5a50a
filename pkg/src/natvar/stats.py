"""Corpus statistics: per-pattern counts, overlap buckets, mean utterances."""

from __future__ import annotations

from dataclasses import dataclass

from .io import serialize_corpus, sha256_hex
from .model import DialogCorpus, mean_utterances
from .planner import overlap_histogram
from .recipes import ADDED_TURNS, patterns_for_dataset

# The source statistics publish per-pattern added-turn counts for the SMD
# testbed only; the restaurant corpus reuses them. Stated on every report.
ADDED_TURNS_ASSUMPTION = (
    "added-turn counts per pattern are the SMD values, reused for the "
    "restaurant (bAbI) corpus"
)


@dataclass(frozen=True)
class CorpusStats:
    source_format: str
    n_dialogs: int
    n_utterances: int
    mean_utterances: float
    n_updated: int
    pattern_counts: tuple[tuple[str, int], ...]
    histogram: tuple[tuple[int, int], ...]
    lexicon_size: int
    checksum: str
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "source_format": self.source_format,
            "n_dialogs": self.n_dialogs,
            "n_utterances": self.n_utterances,
            "mean_utterances": self.mean_utterances,
            "n_updated": self.n_updated,
            "pattern_counts": dict(self.pattern_counts),
            "histogram": {f">={k}": v for k, v in self.histogram},
            "lexicon_size": self.lexicon_size,
            "checksum": self.checksum,
            "notes": list(self.notes),
        }


def corpus_stats(corpus: DialogCorpus, notes: tuple[str, ...] = ()) -> CorpusStats:
    counts = {p: 0 for p in patterns_for_dataset(corpus.source_format)}
    for d in corpus.dialogs:
        for p in d.applied_patterns:
            counts[p] = counts.get(p, 0) + 1
    hist = overlap_histogram(corpus)
    n_utt = sum(len(d.turns) for d in corpus.dialogs)
    return CorpusStats(
        source_format=corpus.source_format,
        n_dialogs=len(corpus.dialogs),
        n_utterances=n_utt,
        mean_utterances=mean_utterances(corpus),
        n_updated=len(corpus.updated_dialogs()),
        pattern_counts=tuple(counts.items()),
        histogram=tuple(sorted(hist.items())),
        lexicon_size=len(corpus.global_entities),
        checksum=sha256_hex(corpus.source_bytes or serialize_corpus(corpus)),
        notes=notes + (ADDED_TURNS_ASSUMPTION,),
    )


def render_stats(stats: CorpusStats) -> str:
    lines = [
        f"format: {stats.source_format}",
        f"checksum: sha256:{stats.checksum}",
        f"dialogs: {stats.n_dialogs}",
        f"utterances: {stats.n_utterances}",
        f"mean utterances per dialog: {stats.mean_utterances:.2f}",
        f"entity lexicon size: {stats.lexicon_size}",
        f"dialogs updated: {stats.n_updated}",
        "dialogs updated per pattern:",
    ]
    for name, count in stats.pattern_counts:
        lines.append(f"  {name:<36}{count:>6}  (+{ADDED_TURNS[name]} turns each)")
    lines.append("dialogs updated per number of patterns:")
    for k, v in stats.histogram:
        lines.append(f"  >={k:<3}{v:>6}")
    for note in stats.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
