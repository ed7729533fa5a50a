"""Injection recipes: applicability heuristics, anchors, turn realization.

Each of the nine recipe-bearing patterns is a fixed template of additional
user/agent turns spliced into an existing dialog at an anchor position.
Templates are alternating blocks, so splicing at a valid anchor preserves
the user/agent alternation of the host dialog. Injected turns never modify
an original turn, which is what keeps the masked-evaluation manifest
invariant under injection.

Anchor heuristics key off the dialog annotations (slot values, question
forms, knowledge-base contents). Where a slip or a corrupted answer is
needed, the distractor is the value of the same attribute drawn from the
dialog's KB (falling back to the fixed slot vocabulary for the restaurant
corpus); dialogs without any distractor simply yield no anchor.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum

from .babi import BABI_SLOT_VALUES, slot_for_question
from .model import (
    Dialog,
    KbRecord,
    ModelError,
    Speaker,
    Turn,
    entity_display,
    entity_spans,
    normalize_entity,
)
from .phrasebank import variants


class AnchorKind(Enum):
    DIALOG_START = "dialog_start"
    BEFORE_AGENT_TURN = "before_agent_turn"
    AFTER_AGENT_TURN = "after_agent_turn"
    BEFORE_USER_TURN = "before_user_turn"
    DIALOG_END = "dialog_end"


@dataclass(frozen=True)
class TemplateTurn:
    speaker: Speaker
    action: str
    slots: tuple[str, ...] = ()


@dataclass(frozen=True)
class PatternRecipe:
    name: str
    klass: str
    anchor_kind: AnchorKind
    template: tuple[TemplateTurn, ...]
    datasets: frozenset[str]

    @property
    def added_turn_count(self) -> int:
        return len(self.template)

    def __post_init__(self):
        for i in range(1, len(self.template)):
            if self.template[i].speaker is self.template[i - 1].speaker:
                raise ModelError(f"recipe {self.name}: template does not alternate")


@dataclass(frozen=True)
class Anchor:
    dialog_id: str
    turn_index: int
    bound: tuple[tuple[str, str], ...] = ()

    def bound_map(self) -> dict[str, str]:
        return dict(self.bound)


class InjectionError(ValueError):
    """Invalid anchor, missing slot binding, or re-applied pattern."""


_U, _A = Speaker.USER, Speaker.AGENT


def _tpl(*turns: tuple) -> tuple[TemplateTurn, ...]:
    return tuple(TemplateTurn(s, a, tuple(sl)) for s, a, *sl in turns)


RECIPES: dict[str, PatternRecipe] = {
    r.name: r
    for r in (
        PatternRecipe(
            "open_request_screening", "A", AnchorKind.DIALOG_START,
            _tpl((_U, "PRE-REQUEST", "intent"), (_A, "GO-AHEAD")),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "open_request_user_detail_request", "A", AnchorKind.BEFORE_USER_TURN,
            _tpl((_U, "DETAIL-REQUEST"), (_A, "ENUMERATION", "options")),
            frozenset({"babi"}),
        ),
        PatternRecipe(
            "example_request", "B", AnchorKind.AFTER_AGENT_TURN,
            _tpl((_U, "EXAMPLE-REQUEST"), (_A, "EXAMPLE", "example")),
            frozenset({"smd"}),
        ),
        PatternRecipe(
            "misunderstanding_report", "B", AnchorKind.BEFORE_AGENT_TURN,
            _tpl(
                (_A, "CORRUPTED-ANSWER", "corrupted_answer"),
                (_U, "REPORT"),
                (_A, "APOLOGY-REPEAT-REQUEST"),
                (_U, "RESTATEMENT", "prior_request"),
            ),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "other_correction", "B", AnchorKind.BEFORE_USER_TURN,
            _tpl((_U, "SLIP", "slip_utterance"), (_A, "CORRECTION", "value", "distractor")),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "sequence_closer_not_helped", "B", AnchorKind.AFTER_AGENT_TURN,
            _tpl((_U, "CLOSER"), (_A, "RECEIPT")),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "sequence_closer_repaired", "B", AnchorKind.AFTER_AGENT_TURN,
            _tpl((_U, "APPRECIATION"), (_A, "RECEIPT")),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "capability_expansion", "C", AnchorKind.DIALOG_START,
            _tpl(
                (_U, "CAPABILITY-CHECK"),
                (_A, "CAPABILITY-LIST", "capabilities"),
                (_U, "EXPANSION-REQUEST", "capability_1"),
                (_A, "EXPANSION", "capability_1", "example_1"),
                (_U, "EXPANSION-REQUEST", "capability_2"),
                (_A, "EXPANSION", "capability_2", "example_2"),
                (_U, "EXPANSION-REQUEST", "capability_3"),
                (_A, "EXPANSION", "capability_3", "example_3"),
                (_U, "ACKNOWLEDGEMENT"),
                (_A, "RECEIPT"),
            ),
            frozenset({"babi", "smd"}),
        ),
        PatternRecipe(
            "recipient_correction", "C", AnchorKind.BEFORE_USER_TURN,
            _tpl(
                (_U, "SIDE-REMARK"),
                (_A, "MISTAKEN-REPLY"),
                (_U, "CORRECTION"),
                (_A, "STAND-BY"),
                (_U, "SIDE-REMARK"),
                (_A, "MISTAKEN-REPLY"),
                (_U, "CORRECTION"),
                (_A, "STAND-BY"),
            ),
            frozenset({"smd"}),
        ),
    )
}

#: Table-row order used for assignment priority.
PATTERN_ORDER = (
    "open_request_screening",
    "open_request_user_detail_request",
    "example_request",
    "misunderstanding_report",
    "other_correction",
    "sequence_closer_not_helped",
    "sequence_closer_repaired",
    "capability_expansion",
    "recipient_correction",
)

ADDED_TURNS = {name: r.added_turn_count for name, r in RECIPES.items()}


def patterns_for_dataset(dataset: str) -> tuple[str, ...]:
    return tuple(n for n in PATTERN_ORDER if dataset in RECIPES[n].datasets)


def _keyed_rng(seed: int, dialog_id: str, pattern: str, purpose: str = "") -> random.Random:
    key = f"{seed}|{dialog_id}|{pattern}|{purpose}".encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


# --- intent / capability data -------------------------------------------

_INTENT_PHRASES = {
    "navigate": "finding a place",
    "weather": "the weather",
    "schedule": "my schedule",
    "restaurant": "a restaurant reservation",
}

_SMD_CAPABILITIES = (
    ("calendar scheduling", "when your next dentist appointment is"),
    ("weather information", "the weekend forecast for cleveland"),
    ("navigation to points of interest", "the route to the nearest gas station"),
)

_BABI_CAPABILITIES = (
    ("restaurant recommendations", "a cheap italian restaurant in paris"),
    ("table reservations", "a table for four in rome"),
    ("restaurant information", "the phone number or the address of a restaurant"),
)

# Markers an agent turn uses when it could not fulfill the request.
_SMD_UNHELPFUL_MARKERS = (
    "could not find", "couldn't find", "no results", "i don't have",
    "i do not have", "there are no", "unable to find", "no match",
    "nothing matching",
)
_BABI_UNHELPFUL_MARKERS = ("find an other option", "no match")


def _is_question(text: str, domain: str) -> bool:
    if text.strip().endswith("?"):
        return True
    return domain == "restaurant" and slot_for_question(text) is not None


def _distractor(kb: KbRecord, domain: str, attribute: str, value: str,
                rng: random.Random) -> str | None:
    """Same-attribute value != `value`, picked under the seeded draw."""
    candidates = [v for v in kb.values_for(attribute) if v != value]
    if not candidates and value in kb.subjects():
        candidates = [s for s in kb.subjects() if s != value]
    if not candidates and domain == "restaurant":
        plain = attribute[2:] if attribute.startswith("r_") else attribute
        candidates = [v for v in BABI_SLOT_VALUES.get(plain, ()) if v != value]
    if not candidates:
        return None
    return candidates[rng.randrange(len(candidates))]


def _swap_span(text: str, canonical: str, replacement: str) -> str | None:
    """`text` with the first token span matching `canonical` replaced."""
    spans = entity_spans(text, {canonical})
    if not spans:
        return None
    start, end, _ = spans[0]
    toks = text.split()
    return " ".join(toks[:start] + [entity_display(replacement)] + toks[end:])


# --- anchor heuristics ---------------------------------------------------

def find_anchors(recipe: PatternRecipe, d: Dialog, seed: int = 0) -> list[Anchor]:
    """Structurally valid anchors for `recipe` in `d`, ordered by turn index.

    An empty list means the pattern is not applicable to the dialog. Bound
    values (distractors, enumerations, examples) are resolved here, with
    value draws keyed by (seed, dialog id, pattern name).
    """
    dataset = "babi" if d.domain == "restaurant" else "smd"
    if dataset not in recipe.datasets or not d.turns:
        return []
    rng = _keyed_rng(seed, d.id, recipe.name, "anchors")
    finder = _FINDERS[recipe.name]
    return finder(d, rng)


def _anchors_screening(d: Dialog, rng) -> list[Anchor]:
    if d.turns[0].speaker is not Speaker.USER:
        return []
    intent = _INTENT_PHRASES[d.domain]
    return [Anchor(d.id, 0, (("intent", intent),))]


def _anchors_user_detail(d: Dialog, rng) -> list[Anchor]:
    anchors = []
    for i, t in enumerate(d.turns):
        if t.speaker is not Speaker.USER or i == 0:
            continue
        prev = d.turns[i - 1]
        slot = slot_for_question(prev.text)
        if slot is None or not prev.is_original:
            continue
        values = d.kb.values_for(f"r_{slot}")
        if len(values) < 2:
            # The per-dialog KB rarely lists alternatives (candidates match
            # the query); the simulator's fixed vocabulary is the option set.
            values = list(BABI_SLOT_VALUES.get(slot, ()))
        if len(values) < 2:
            continue
        options = ", ".join(entity_display(v) for v in values)
        anchors.append(Anchor(d.id, i, (("options", options),)))
    return anchors


def _anchors_example(d: Dialog, rng) -> list[Anchor]:
    if not d.kb.entries:
        return []
    anchors = []
    for i, t in enumerate(d.turns):
        if t.speaker is not Speaker.AGENT or not t.is_original:
            continue
        low = f" {t.text.lower()} "
        states_rule = t.text.strip().endswith("?") or " i can " in low or low.startswith(" you can ")
        if not states_rule:
            continue
        subjects = d.kb.subjects()
        example = entity_display(subjects[rng.randrange(len(subjects))])
        anchors.append(Anchor(d.id, i, (("example", example),)))
    return anchors


def _anchors_misunderstanding(d: Dialog, rng) -> list[Anchor]:
    lexicon = d.entity_lexicon()
    if not lexicon:
        return []
    anchors = []
    for i, t in enumerate(d.turns):
        if t.speaker is not Speaker.AGENT or not t.is_original or i == 0:
            continue
        spans = entity_spans(t.text, lexicon)
        bound = None
        for _, _, ent in spans:
            for attr in d.kb.attributes_of(ent):
                distr = _distractor(d.kb, d.domain, attr, ent, rng)
                if distr is not None:
                    corrupted = _swap_span(t.text, ent, distr)
                    if corrupted:
                        bound = (
                            ("corrupted_answer", corrupted),
                            ("prior_request", d.turns[i - 1].text),
                        )
                    break
            if bound:
                break
        if bound:
            anchors.append(Anchor(d.id, i, bound))
    return anchors


def _anchors_other_correction(d: Dialog, rng) -> list[Anchor]:
    anchors = []
    for i, t in enumerate(d.turns):
        if t.speaker is not Speaker.USER or not t.is_original:
            continue
        bound = None
        for slot, raw in sorted(t.slots().items()):
            value = normalize_entity(raw)
            distr = _distractor(d.kb, d.domain, slot, value, rng)
            if distr is None:
                continue
            slip = _swap_span(t.text, value, distr)
            if slip is None:
                continue
            bound = (
                ("slip_utterance", slip),
                ("value", entity_display(value)),
                ("distractor", entity_display(distr)),
            )
            break
        if bound:
            anchors.append(Anchor(d.id, i, bound))
    return anchors


def _anchors_not_helped(d: Dialog, rng) -> list[Anchor]:
    markers = _BABI_UNHELPFUL_MARKERS if d.domain == "restaurant" else _SMD_UNHELPFUL_MARKERS
    anchors = []
    for i, t in enumerate(d.turns):
        if t.speaker is not Speaker.AGENT or not t.is_original:
            continue
        low = t.text.lower()
        if any(m in low for m in markers):
            anchors.append(Anchor(d.id, i))
    return anchors


def _anchors_repaired(d: Dialog, rng) -> list[Anchor]:
    anchors = []
    for i in range(2, len(d.turns)):
        t = d.turns[i]
        if t.speaker is not Speaker.AGENT or not t.is_original:
            continue
        asked = d.turns[i - 2]
        if asked.speaker is Speaker.AGENT and asked.is_original \
                and _is_question(asked.text, d.domain) and not _is_question(t.text, d.domain):
            anchors.append(Anchor(d.id, i))
    return anchors


def _anchors_capability(d: Dialog, rng) -> list[Anchor]:
    if d.turns[0].speaker is not Speaker.USER:
        return []
    caps = _BABI_CAPABILITIES if d.domain == "restaurant" else _SMD_CAPABILITIES
    bound = [("capabilities", ", ".join(c for c, _ in caps))]
    for k, (cap, example) in enumerate(caps, start=1):
        bound.append((f"capability_{k}", cap))
        bound.append((f"example_{k}", example))
    return [Anchor(d.id, 0, tuple(bound))]


def _anchors_recipient(d: Dialog, rng) -> list[Anchor]:
    return [
        Anchor(d.id, i)
        for i, t in enumerate(d.turns)
        if t.speaker is Speaker.USER and t.is_original
    ]


_FINDERS = {
    "open_request_screening": _anchors_screening,
    "open_request_user_detail_request": _anchors_user_detail,
    "example_request": _anchors_example,
    "misunderstanding_report": _anchors_misunderstanding,
    "other_correction": _anchors_other_correction,
    "sequence_closer_not_helped": _anchors_not_helped,
    "sequence_closer_repaired": _anchors_repaired,
    "capability_expansion": _anchors_capability,
    "recipient_correction": _anchors_recipient,
}


# --- realization and splicing --------------------------------------------

def realize(recipe: PatternRecipe, action: str, domain: str,
            bound: dict[str, str], draw: int | random.Random,
            bank: dict | None = None) -> str:
    """Surface string for one template action with all slots substituted.

    `draw` selects the variant: an int index (modulo the variant count) or
    a random.Random consumed for one draw.
    """
    forms = variants(recipe.name, action, domain, bank)
    idx = draw.randrange(len(forms)) if isinstance(draw, random.Random) else draw % len(forms)
    try:
        text = forms[idx].format_map(bound)
    except KeyError as e:
        raise InjectionError(f"unresolvable realization slot {e.args[0]!r}") from e
    if "{" in text or "}" in text:
        raise InjectionError(f"unsubstituted slot marker remains in {text!r}")
    return text


def _insert_position(recipe: PatternRecipe, d: Dialog, a: Anchor) -> int:
    if a.turn_index < 0 or a.turn_index > len(d.turns):
        raise InjectionError(f"anchor index {a.turn_index} out of range for {d.id}")
    kind = recipe.anchor_kind
    if kind is AnchorKind.DIALOG_START:
        return a.turn_index
    if kind is AnchorKind.DIALOG_END:
        return len(d.turns)
    if a.turn_index >= len(d.turns):
        raise InjectionError(f"anchor index {a.turn_index} out of range for {d.id}")
    at = d.turns[a.turn_index]
    if kind is AnchorKind.BEFORE_USER_TURN:
        if at.speaker is not Speaker.USER:
            raise InjectionError(f"anchor {a.turn_index} in {d.id} is not a user turn")
        return a.turn_index
    if kind is AnchorKind.BEFORE_AGENT_TURN:
        if at.speaker is not Speaker.AGENT:
            raise InjectionError(f"anchor {a.turn_index} in {d.id} is not an agent turn")
        return a.turn_index
    if kind is AnchorKind.AFTER_AGENT_TURN:
        if at.speaker is not Speaker.AGENT:
            raise InjectionError(f"anchor {a.turn_index} in {d.id} is not an agent turn")
        return a.turn_index + 1
    raise InjectionError(f"unsupported anchor kind {kind}")


def inject(d: Dialog, recipe: PatternRecipe, a: Anchor, seed: int,
           bank: dict | None = None) -> Dialog:
    """New dialog with the recipe's turns spliced at the anchor.

    Pure function of its inputs: surface draws are keyed by
    (seed, dialog id, pattern name), not by call order.
    """
    if a.dialog_id != d.id:
        raise InjectionError(f"anchor belongs to {a.dialog_id}, not {d.id}")
    if recipe.name in d.applied_patterns:
        raise InjectionError(f"pattern already applied at anchor: {recipe.name} in {d.id}")
    pos = _insert_position(recipe, d, a)

    block_first = recipe.template[0].speaker
    block_last = recipe.template[-1].speaker
    if pos == 0:
        if block_first is not Speaker.USER:
            raise InjectionError(f"{recipe.name}: block at dialog start must open with the user")
    elif d.turns[pos - 1].speaker is block_first:
        raise InjectionError(f"{recipe.name}: splice at {pos} breaks alternation")
    if pos < len(d.turns) and d.turns[pos].speaker is block_last:
        raise InjectionError(f"{recipe.name}: splice at {pos} breaks alternation")

    bound = a.bound_map()
    missing = [s for t in recipe.template for s in t.slots if s not in bound]
    if missing:
        raise InjectionError(f"unresolvable realization slot {missing[0]!r}")

    rng = _keyed_rng(seed, d.id, recipe.name, "surface")
    base_draw: dict[str, int] = {}
    seen: dict[str, int] = {}
    new_turns = []
    for t in recipe.template:
        forms = variants(recipe.name, t.action, d.domain, bank)
        if t.action not in base_draw:
            base_draw[t.action] = rng.randrange(len(forms))
        occ = seen.get(t.action, 0)
        seen[t.action] = occ + 1
        # Repeated actions rotate variants so cycles do not repeat verbatim.
        idx = (base_draw[t.action] + occ) % len(forms)
        projected = {s.rstrip("0123456789").rstrip("_"): bound[s] for s in t.slots}
        text = realize(recipe, t.action, d.domain, projected, idx, bank)
        new_turns.append(Turn(t.speaker, text, injected_by=recipe.name))

    turns = d.turns[:pos] + tuple(new_turns) + d.turns[pos:]
    return Dialog(id=d.id, domain=d.domain, turns=turns, kb=d.kb, source_info=d.source_info)
