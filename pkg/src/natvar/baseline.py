"""Deterministic tf-idf retrieval baseline.

Exists to drive the inject -> evaluate pipeline end to end without neural
models; its scores are illustrative, not a modeling claim. For each
scoreable agent response it ranks a fixed candidate set by cosine
similarity between the term-frequency bag of the dialog history and the
candidate, both idf-weighted from the candidate set. Ties break toward
the lowest candidate index, so output is scheduling-independent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .babi import ParseError
from .manifest import EvalManifest, PredictionSet
from .model import DialogCorpus, Turn


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class CandidateSet:
    responses: tuple[str, ...]

    def __post_init__(self):
        if not self.responses:
            raise BaselineError("empty candidate set")


def load_candidates(data: bytes) -> CandidateSet:
    """One candidate per line; a leading integer token (bAbI candidate
    file numbering) is stripped. Deduplicated keeping first occurrence."""
    seen = set()
    out = []
    for line in data.decode("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head.isdigit() and rest:
            line = rest
        if line not in seen:
            seen.add(line)
            out.append(line)
    if not out:
        raise ParseError("candidate file contains no candidates")
    return CandidateSet(tuple(out))


def candidates_from_corpus(corpus: DialogCorpus) -> CandidateSet:
    """Gold agent responses of a corpus as the candidate pool."""
    seen = set()
    out = []
    for d in corpus.dialogs:
        for t in d.turns:
            if t.speaker.value == "agent" and t.is_original and t.text not in seen:
                seen.add(t.text)
                out.append(t.text)
    return CandidateSet(tuple(out))


class TfIdfScorer:
    """idf weights come from the candidate set; history/candidate vectors
    use raw term frequency times idf."""

    def __init__(self, candidates: CandidateSet):
        self.candidates = candidates
        n = len(candidates.responses)
        df: Counter = Counter()
        self._cand_tokens = []
        for resp in candidates.responses:
            toks = resp.lower().split()
            self._cand_tokens.append(toks)
            df.update(set(toks))
        self._idf = {t: math.log(n / c) + 1.0 for t, c in df.items()}
        self._cand_vectors = [self._vector(toks) for toks in self._cand_tokens]

    def _vector(self, tokens: list[str]) -> dict[str, float]:
        vec = {}
        for tok, tf in Counter(tokens).items():
            idf = self._idf.get(tok)
            if idf is not None:
                vec[tok] = tf * idf
        return vec

    def score(self, history: list[Turn], candidate_index: int) -> float:
        """Cosine similarity of the concatenated history and one candidate."""
        if not history:
            raise BaselineError("empty history")
        h = self._vector(" ".join(t.text for t in history).lower().split())
        c = self._cand_vectors[candidate_index]
        if not h or not c:
            return 0.0
        dot = sum(w * c[t] for t, w in h.items() if t in c)
        if dot == 0.0:
            return 0.0
        nh = math.sqrt(sum(w * w for w in h.values()))
        nc = math.sqrt(sum(w * w for w in c.values()))
        return dot / (nh * nc)

    def best(self, history: list[Turn]) -> int:
        best_i = 0
        best_s = -1.0
        for i in range(len(self.candidates.responses)):
            s = self.score(history, i)
            if s > best_s:
                best_i, best_s = i, s
        return best_i


def predict(corpus: DialogCorpus, manifest: EvalManifest,
            candidates: CandidateSet) -> PredictionSet:
    """Argmax candidate for each manifest entry over the dialog history up
    to that turn. Deterministic and total given a non-empty candidate set."""
    scorer = TfIdfScorer(candidates)
    by_id = corpus.dialog_by_id()
    responses = []
    for entry in manifest.entries:
        dialog = by_id.get(entry.dialog_id)
        if dialog is None or entry.turn_index >= len(dialog.turns):
            raise BaselineError(f"manifest entry {entry.dialog_id}@{entry.turn_index} not in corpus")
        history = list(dialog.turns[: entry.turn_index])
        if not history:
            responses.append(candidates.responses[0])
            continue
        responses.append(candidates.responses[scorer.best(history)])
    return PredictionSet(tuple(responses), manifest.digest())
