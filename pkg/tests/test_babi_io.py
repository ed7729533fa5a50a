import pytest
from dataclasses import replace

from natvar.babi import (
    ParseError,
    parse_babi,
    serialize_babi,
    serialize_origin_sidecar,
    slot_for_question,
)
from natvar.model import Speaker
from natvar.planner import PlanConfig, execute, plan
from natvar.recipes import RECIPES, find_anchors, inject

SIMPLE = (
    "1 hi\thello what can i help you with today\n"
    "2 may i have a table with french cuisine in paris for six people in a cheap price range\ti'm on it\n"
    "3 <silence>\tapi_call french paris six cheap\n"
    "4 resto_1 r_phone resto_1_phone\n"
    "5 resto_1 r_cuisine french\n"
    "6 <silence>\twhat do you think of this option: resto_1\n"
    "7 let's do it\tgreat let me do the reservation\n"
).encode()


class TestParse:
    def test_utterance_line_yields_two_turns(self):
        c = parse_babi(b"1 hi\thello what can i help you with today\n")
        d = c.dialogs[0]
        assert [(t.speaker, t.text) for t in d.turns] == [
            (Speaker.USER, "hi"),
            (Speaker.AGENT, "hello what can i help you with today"),
        ]

    def test_kb_line_goes_to_record(self):
        c = parse_babi(SIMPLE)
        d = c.dialogs[0]
        assert ("resto_1", "r_phone", "resto_1_phone") in d.kb.entries
        assert ("resto_1", "r_cuisine", "french") in d.kb.entries
        # KB lines are not turns
        assert len(d.turns) == 8

    def test_full_fixture_has_1000_dialogs(self, babi_corpus):
        assert len(babi_corpus.dialogs) == 1000

    def test_api_call_slot_annotations(self):
        d = parse_babi(SIMPLE).dialogs[0]
        agent_api = d.turns[5]
        assert agent_api.text.startswith("api_call")
        assert agent_api.slots() == {
            "cuisine": "french", "location": "paris", "number": "six", "price": "cheap",
        }
        request = d.turns[2]
        assert request.slots() == {
            "cuisine": "french", "location": "paris", "number": "six", "price": "cheap",
        }

    def test_non_monotone_index_rejected(self):
        bad = b"1 hi\thello\n1 more\ttext\n"
        with pytest.raises(ParseError, match="line 2"):
            parse_babi(bad)

    def test_malformed_line_rejected(self):
        bad = b"1 hi\thello\n2 these are five separate tokens\n"
        with pytest.raises(ParseError, match="line 2"):
            parse_babi(bad)

    def test_dialog_ids_are_stable(self, babi_corpus):
        assert babi_corpus.dialogs[0].id == "babi-0"
        assert babi_corpus.dialogs[999].id == "babi-999"

    def test_slot_question_detection(self):
        assert slot_for_question("any preference on a type of cuisine") == "cuisine"
        assert slot_for_question("where should it be") == "location"
        assert slot_for_question("great let me do the reservation") is None


class TestRoundTrip:
    def test_pristine_bytes_shortcut(self, babi_bytes, babi_corpus):
        assert serialize_babi(babi_corpus) == babi_bytes

    def test_canonical_emission_matches_fixture(self, babi_bytes, babi_corpus):
        forced = replace(babi_corpus, source_bytes=b"")
        assert serialize_babi(forced) == babi_bytes

    def test_model_round_trip_after_injection(self, small_babi_corpus):
        cfg = PlanConfig(
            targets={"open_request_screening": 5, "misunderstanding_report": 5},
            seed=3,
            max_patterns_per_dialog=5,
            histogram_targets=None,
        )
        updated = execute(small_babi_corpus, plan(small_babi_corpus, cfg))
        data = serialize_babi(updated)
        sidecar = serialize_origin_sidecar(updated)
        reparsed = parse_babi(data, sidecar)
        assert reparsed == replace(updated, source_bytes=b"")

    def test_renumbering_after_leading_injection(self):
        corpus = parse_babi(SIMPLE)
        d = corpus.dialogs[0]
        recipe = RECIPES["open_request_screening"]
        anchor = find_anchors(recipe, d, seed=0)[0]
        updated = inject(d, recipe, anchor, seed=0)
        out = serialize_babi(
            replace(corpus, dialogs=(updated,), source_bytes=b"")
        ).decode()
        lines = out.strip().split("\n")
        # Old line 1 ("hi ...") is now line 2 of the block... the injected
        # exchange occupies line 1.
        assert lines[0].startswith("1 ")
        assert "hi\thello what can i help you with today" in lines[1]
        assert lines[1].startswith("2 ")
        # KB facts keep their position before the option agent turn.
        kb_positions = [i for i, ln in enumerate(lines) if " r_phone " in ln or " r_cuisine " in ln]
        option_pos = next(i for i, ln in enumerate(lines) if "what do you think" in ln)
        assert all(p < option_pos for p in kb_positions)
        assert max(kb_positions) == option_pos - 1

    def test_sidecar_lists_injected_indices(self):
        corpus = parse_babi(SIMPLE)
        d = corpus.dialogs[0]
        recipe = RECIPES["open_request_screening"]
        anchor = find_anchors(recipe, d, seed=0)[0]
        updated = replace(corpus, dialogs=(inject(d, recipe, anchor, seed=0),), source_bytes=b"")
        sidecar = serialize_origin_sidecar(updated).decode()
        assert sidecar.startswith("babi-0: 0=open_request_screening,1=open_request_screening")
