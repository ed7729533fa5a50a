"""SMD (in-car assistant) JSON format: parsing and serialization.

The source file is a JSON array of dialogue objects:

    {"dialogue": [{"turn": "driver"|"assistant",
                   "data": {"utterance": ..., "end_dialogue": ...,
                            "requested": {...}, "slots": {...}}}, ...],
     "scenario": {"kb": {"items": [...] | null, ...},
                  "task": {"intent": "schedule"|"weather"|"navigate"},
                  "uuid": ...}}

Injected turns are serialized as ordinary turn objects with two additive
fields, `"injected": true` and `"pattern": "<name>"`, so consumers of the
original schema still parse updated files.

Original turn objects and scenario objects are retained verbatim (as
compact JSON strings) so that serialization is lossless.
"""

from __future__ import annotations

import json

from .babi import ParseError
from .model import (
    Dialog,
    DialogCorpus,
    KbRecord,
    ModelError,
    Speaker,
    Turn,
    build_global_entities,
    entities_in,
    normalize_entity,
)

SMD_DOMAINS = ("schedule", "weather", "navigate")

# Primary-key column per domain; the subject of every flattened KB triple.
_SUBJECT_KEYS = {"navigate": "poi", "weather": "location", "schedule": "event"}

_SPEAKERS = {"driver": Speaker.USER, "assistant": Speaker.AGENT}
_TAGS = {Speaker.USER: "driver", Speaker.AGENT: "assistant"}


def _compact(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def parse_smd(data: bytes) -> DialogCorpus:
    """Parse an SMD JSON file into a corpus."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"not valid SMD JSON: {e}") from e
    if not isinstance(doc, list):
        raise ParseError("SMD file must be a JSON array of dialogues")

    dialogs = tuple(_parse_dialogue(el, i) for i, el in enumerate(doc))
    return DialogCorpus(
        dialogs=dialogs,
        source_format="smd",
        global_entities=build_global_entities(dialogs),
        source_bytes=data,
    )


def _parse_dialogue(el, index: int) -> Dialog:
    did = f"smd-{index}"
    try:
        scenario = el["scenario"]
        domain = scenario["task"]["intent"]
        raw_turns = el["dialogue"]
    except (TypeError, KeyError) as e:
        raise ParseError(f"dialog {index}: malformed dialogue object ({e})") from e
    if domain not in SMD_DOMAINS:
        raise ParseError(f"dialog {index}: unknown domain {domain!r}")

    kb = _flatten_kb(scenario, domain, index)

    turns: list[Turn] = []
    raw_originals: list[str] = []
    for j, obj in enumerate(raw_turns):
        try:
            speaker = _SPEAKERS[obj["turn"]]
            utterance = obj["data"]["utterance"]
        except (TypeError, KeyError) as e:
            raise ParseError(f"dialog {index}: malformed turn object {j} ({e})") from e
        text = " ".join(str(utterance).split())
        if not text:
            raise ParseError(f"dialog {index}: empty utterance in turn {j}")
        injected_by = obj.get("pattern") if obj.get("injected") else None
        annotations = () if injected_by else _turn_annotations(obj["data"], text, kb)
        try:
            turns.append(Turn(speaker, text, injected_by=injected_by, annotations=annotations))
        except ModelError as e:
            raise ParseError(f"dialog {index}: {e}") from e
        if injected_by is None:
            raw_originals.append(_compact(obj))

    turns = _derive_user_slots(turns, kb)

    try:
        return Dialog(
            id=did,
            domain=domain,
            turns=tuple(turns),
            kb=kb,
            source_info=(_compact(scenario), tuple(raw_originals)),
        )
    except ModelError as e:
        raise ParseError(f"dialog {index}: {e}") from e


def _flatten_kb(scenario, domain: str, index: int) -> KbRecord:
    kb_obj = scenario.get("kb") or {}
    items = kb_obj.get("items")
    if not items:
        # Some scenarios intentionally lack KB attributes.
        return KbRecord()
    subject_key = _SUBJECT_KEYS[domain]
    entries = []
    for item in items:
        if not isinstance(item, dict) or not item:
            raise ParseError(f"dialog {index}: malformed KB item")
        subj_raw = item.get(subject_key) or next(iter(item.values()))
        subj = normalize_entity(str(subj_raw))
        for key, val in item.items():
            if key == subject_key or val is None:
                continue
            entries.append((subj, normalize_entity(str(key)), normalize_entity(str(val))))
    return KbRecord(entries=tuple(entries))


def _turn_annotations(data, text: str, kb: KbRecord) -> tuple[tuple[str, str], ...]:
    ann: list[tuple[str, str]] = []
    slots = data.get("slots") or {}
    kb_ents = kb.all_entities()
    for key, val in slots.items():
        if not isinstance(val, str) or not val.strip():
            continue
        norm = normalize_entity(val)
        # Keep only slot values grounded in the utterance or the KB.
        if norm in kb_ents or entities_in(text, {norm}):
            ann.append((f"slot:{key}", val))
    requested = data.get("requested") or {}
    for key, flag in requested.items():
        if flag:
            ann.append((f"requested:{key}", "true"))
    return tuple(ann)


def _derive_user_slots(turns: list[Turn], kb: KbRecord) -> list[Turn]:
    """Copy each assistant slot annotation onto the nearest preceding
    original user turn that mentions the slot value."""
    extra: dict[int, list[tuple[str, str]]] = {}
    for i, t in enumerate(turns):
        if t.speaker is not Speaker.AGENT or not t.is_original:
            continue
        for key, val in t.annotations:
            if not key.startswith("slot:"):
                continue
            norm = normalize_entity(val)
            for j in range(i - 1, -1, -1):
                u = turns[j]
                if u.speaker is Speaker.USER and u.is_original and entities_in(u.text, {norm}):
                    have = dict(u.annotations) | {k: v for k, v in extra.get(j, [])}
                    if key not in have:
                        extra.setdefault(j, []).append((key, val))
                    break
    if not extra:
        return turns
    return [
        Turn(t.speaker, t.text, injected_by=t.injected_by,
             annotations=t.annotations + tuple(extra.get(i, [])))
        if i in extra else t
        for i, t in enumerate(turns)
    ]


def serialize_smd(corpus: DialogCorpus) -> bytes:
    """Serialize to SMD JSON (canonical 2-space-indent form).

    Returns the retained source bytes verbatim when the corpus is untouched
    and came from a file.
    """
    if corpus.source_bytes and corpus.is_pristine:
        return corpus.source_bytes
    doc = []
    for d in corpus.dialogs:
        scenario_json, raw_originals = d.source_info
        originals = iter(raw_originals)
        turn_objs = []
        for t in d.turns:
            if t.is_original:
                turn_objs.append(json.loads(next(originals)))
            else:
                turn_objs.append({
                    "turn": _TAGS[t.speaker],
                    "data": {"end_dialogue": False, "utterance": t.text},
                    "injected": True,
                    "pattern": t.injected_by,
                })
        doc.append({"dialogue": turn_objs, "scenario": json.loads(scenario_json)})
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
