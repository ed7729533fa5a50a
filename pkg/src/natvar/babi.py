"""bAbI dialog-task text format: parsing, serialization, origin sidecar.

Format (task 5 grammar, a superset of tasks 1-4):

  - dialogs are blocks separated by one blank line;
  - utterance line:  "<index><SPACE><user text><TAB><agent text>"
  - KB fact line:    "<index><SPACE><subject><SPACE><attribute><SPACE><value>"
  - line indices start at 1 and increase inside each dialog.

The format cannot carry injection flags natively, so updated corpora are
written together with a sidecar file (one line per dialog) recording which
turn indices are injected and by which pattern:

    babi-12: 0=open_request_screening,1=open_request_screening
"""

from __future__ import annotations

from .model import (
    Dialog,
    DialogCorpus,
    KbRecord,
    ModelError,
    Speaker,
    Turn,
    build_global_entities,
    normalize_entity,
)


class ParseError(ValueError):
    """Malformed corpus, prediction, or sidecar input."""


# Fixed value vocabulary of the bAbI restaurant simulator. Used both as the
# format-specific entity lexicon and as the option source for enumerations.
BABI_SLOT_VALUES: dict[str, tuple[str, ...]] = {
    "cuisine": ("british", "cantonese", "french", "indian", "italian",
                "japanese", "korean", "spanish", "thai", "vietnamese"),
    "location": ("bangkok", "beijing", "bombay", "hanoi", "london",
                 "madrid", "paris", "rome", "seoul", "tokyo"),
    "number": ("two", "four", "six", "eight"),
    "price": ("cheap", "moderate", "expensive"),
}

# api_call argument positions, per the task-5 generator.
API_CALL_SLOTS = ("cuisine", "location", "number", "price")

# Agent questions that ask for one enumerable slot.
SLOT_QUESTIONS: dict[str, str] = {
    "any preference on a type of cuisine": "cuisine",
    "where should it be": "location",
    "how many people would be in your party": "number",
    "which price range are looking for": "price",
}


def babi_lexicon() -> set[str]:
    lex: set[str] = set()
    for values in BABI_SLOT_VALUES.values():
        lex.update(values)
    return lex


def slot_for_question(text: str) -> str | None:
    """Slot asked by an agent turn, or None if it is not a slot question."""
    t = text.strip().lower()
    for q, slot in SLOT_QUESTIONS.items():
        if q in t:
            return slot
    return None


def _api_args(agent_text: str) -> dict[str, str]:
    if not agent_text.startswith("api_call "):
        return {}
    args = agent_text.split()[1:]
    if len(args) != len(API_CALL_SLOTS):
        return {}
    return dict(zip(API_CALL_SLOTS, args))


def parse_babi(data: bytes, origin_sidecar: bytes | None = None) -> DialogCorpus:
    """Parse a bAbI dialog-task file into a corpus.

    Line endings are normalized to "\\n". When `origin_sidecar` is given,
    the listed turn indices are restored as injected turns.
    """
    text = data.decode("utf-8").replace("\r\n", "\n").replace("\r", "\n")
    blocks: list[list[tuple[int, str]]] = [[]]
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.strip() == "":
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append((lineno, line))
    if blocks and not blocks[-1]:
        blocks.pop()

    injected = _parse_sidecar(origin_sidecar) if origin_sidecar else {}

    dialogs = []
    for idx, block in enumerate(blocks):
        dialog_id = f"babi-{idx}"
        dialogs.append(_parse_block(block, dialog_id, injected.get(dialog_id, {})))

    dialogs = tuple(dialogs)
    return DialogCorpus(
        dialogs=dialogs,
        source_format="babi",
        global_entities=build_global_entities(dialogs, babi_lexicon()),
        source_bytes=data,
    )


def _parse_block(block, dialog_id: str, injected_turns: dict[int, str]) -> Dialog:
    turns: list[Turn] = []
    # (subject, attribute, value, turn index of the agent turn the fact precedes)
    kb_flushes: list[tuple[str, str, str, int]] = []
    pending_kb: list[tuple[str, str, str]] = []
    api_values: dict[str, list[str]] = {}
    prev_index = 0

    for lineno, line in block:
        head, _, rest = line.partition(" ")
        try:
            index = int(head)
        except ValueError:
            raise ParseError(f"line {lineno}: expected a line index, got {head!r}")
        if index <= prev_index:
            raise ParseError(f"line {lineno}: non-monotone line index {index}")
        prev_index = index

        if "\t" in rest:
            user_text, _, agent_text = rest.partition("\t")
            if not user_text.strip() or not agent_text.strip():
                raise ParseError(f"line {lineno}: empty utterance")
            agent_turn_index = len(turns) + 1
            for subj, attr, val in pending_kb:
                kb_flushes.append((subj, attr, val, agent_turn_index))
            pending_kb.clear()
            agent_annotations: tuple[tuple[str, str], ...] = ()
            # Injected agent turns (a corrupted answer can look like an
            # api_call) contribute neither annotations nor api values.
            if agent_turn_index not in injected_turns:
                args = _api_args(agent_text)
                if args:
                    for slot, val in args.items():
                        api_values.setdefault(slot, []).append(val)
                    agent_annotations = tuple((f"slot:{k}", v) for k, v in args.items())
            turns.append(Turn(Speaker.USER, user_text))
            turns.append(Turn(Speaker.AGENT, agent_text, annotations=agent_annotations))
        else:
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError(
                    f"line {lineno}: not an utterance line (no tab) and not a "
                    f"3-token KB fact: {line!r}"
                )
            pending_kb.append((parts[0], parts[1], parts[2]))

    for subj, attr, val in pending_kb:
        kb_flushes.append((subj, attr, val, len(turns)))

    if injected_turns:
        turns = [
            Turn(t.speaker, t.text, injected_by=injected_turns.get(i), annotations=t.annotations)
            for i, t in enumerate(turns)
        ]

    # Slot annotations for original user turns come from the api_call
    # argument values. Injected turns never carry derived annotations.
    if api_values:
        rebuilt = []
        for t in turns:
            if t.speaker is Speaker.USER and t.is_original:
                toks = set(t.text.lower().split())
                ann = tuple(
                    (f"slot:{slot}", next(v for v in vals if v in toks))
                    for slot, vals in api_values.items()
                    if any(v in toks for v in vals)
                )
                rebuilt.append(Turn(t.speaker, t.text, annotations=ann))
            else:
                rebuilt.append(t)
        turns = rebuilt

    # Anchor each fact by the ordinal of the *original* agent turn it
    # precedes; injected agent turns do not shift the anchors.
    original_agents_before = []
    count = 0
    for t in turns:
        original_agents_before.append(count)
        if t.speaker is Speaker.AGENT and t.is_original:
            count += 1
    kb_rows = tuple(
        (subj, attr, val,
         original_agents_before[i] if i < len(turns) else count)
        for subj, attr, val, i in kb_flushes
    )

    kb = KbRecord(
        entries=tuple(
            (normalize_entity(s), normalize_entity(a), normalize_entity(v))
            for s, a, v, _ in kb_rows
        )
    )
    return Dialog(
        id=dialog_id,
        domain="restaurant",
        turns=tuple(turns),
        kb=kb,
        source_info=kb_rows,
    )


def serialize_babi(corpus: DialogCorpus) -> bytes:
    """Serialize to the canonical bAbI text form.

    Returns the retained source bytes verbatim when the corpus is untouched
    and came from a file; otherwise emits blocks with line indices
    renumbered 1..N per dialog. KB fact lines keep their position relative
    to the original agent turn they precede.
    """
    if corpus.source_bytes and corpus.is_pristine:
        return corpus.source_bytes
    blocks = [_serialize_dialog(d) for d in corpus.dialogs]
    return ("\n\n".join(blocks) + "\n").encode("utf-8")


def _serialize_dialog(d: Dialog) -> str:
    if len(d.turns) % 2 != 0:
        raise ModelError(f"dialog {d.id}: bAbI requires an even number of turns")
    kb_by_ordinal: dict[int, list[tuple[str, str, str]]] = {}
    for subj, attr, val, ordinal in d.source_info:
        kb_by_ordinal.setdefault(ordinal, []).append((subj, attr, val))

    lines: list[str] = []
    index = 1
    agent_ordinal = 0
    for i in range(0, len(d.turns), 2):
        user, agent = d.turns[i], d.turns[i + 1]
        if user.speaker is not Speaker.USER or agent.speaker is not Speaker.AGENT:
            raise ModelError(f"dialog {d.id}: turn pairing broken at {i}")
        if agent.is_original:
            for subj, attr, val in kb_by_ordinal.get(agent_ordinal, []):
                lines.append(f"{index} {subj} {attr} {val}")
                index += 1
            agent_ordinal += 1
        lines.append(f"{index} {user.text}\t{agent.text}")
        index += 1
    for subj, attr, val in kb_by_ordinal.get(agent_ordinal, []):
        lines.append(f"{index} {subj} {attr} {val}")
        index += 1
    return "\n".join(lines)


def serialize_origin_sidecar(corpus: DialogCorpus) -> bytes:
    """One line per dialog: 'dialog_id: i=pattern,j=pattern' (may be empty)."""
    lines = []
    for d in corpus.dialogs:
        marks = ",".join(
            f"{i}={t.injected_by}" for i, t in enumerate(d.turns) if t.injected_by
        )
        lines.append(f"{d.id}: {marks}".rstrip())
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_sidecar(data: bytes) -> dict[str, dict[int, str]]:
    out: dict[str, dict[int, str]] = {}
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        did, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"sidecar line {lineno}: missing ':'")
        marks: dict[int, str] = {}
        rest = rest.strip()
        if rest:
            for item in rest.split(","):
                pos, sep2, pattern = item.partition("=")
                if not sep2:
                    raise ParseError(f"sidecar line {lineno}: expected index=pattern, got {item!r}")
                marks[int(pos)] = pattern
        out[did.strip()] = marks
    return out
