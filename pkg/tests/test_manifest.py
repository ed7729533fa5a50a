import pytest

from natvar.babi import ParseError
from natvar.manifest import (
    export_manifest,
    parse_manifest,
    read_predictions,
    serialize_manifest,
)
from natvar.model import Dialog, DialogCorpus, Speaker, Turn
from natvar.planner import PlanConfig, execute, plan
from natvar.recipes import RECIPES, find_anchors, inject


def _corpus(*dialogs):
    return DialogCorpus(dialogs=tuple(dialogs), source_format="smd")


def _dialog(did="smd-0"):
    return Dialog(
        id=did,
        domain="navigate",
        turns=(
            Turn(Speaker.USER, "hi"),
            Turn(Speaker.AGENT, "hello"),
            Turn(Speaker.USER, "where is it"),
            Turn(Speaker.AGENT, "right here"),
            Turn(Speaker.USER, "thanks"),
            Turn(Speaker.AGENT, "welcome"),
        ),
    )


class TestExportManifest:
    def test_counts_agent_turns(self):
        m = export_manifest(_corpus(_dialog()))
        assert len(m.entries) == 3
        assert [e.gold_text for e in m.entries] == ["hello", "right here", "welcome"]

    def test_injection_does_not_add_entries(self):
        d = _dialog()
        recipe = RECIPES["open_request_screening"]
        anchor = find_anchors(recipe, d, seed=0)[0]
        updated = inject(d, recipe, anchor, seed=0)
        m = export_manifest(_corpus(updated))
        assert len(m.entries) == 3
        assert [e.gold_text for e in m.entries] == ["hello", "right here", "welcome"]

    def test_manifest_gold_sequence_invariant_under_plan(self, small_smd_corpus):
        cfg = PlanConfig(
            targets={"open_request_screening": 4, "capability_expansion": 4},
            seed=11,
            histogram_targets=None,
        )
        updated = execute(small_smd_corpus, plan(small_smd_corpus, cfg))
        before = [(e.dialog_id, e.gold_text) for e in export_manifest(small_smd_corpus).entries]
        after = [(e.dialog_id, e.gold_text) for e in export_manifest(updated).entries]
        assert before == after

    def test_entries_ordered_by_corpus_position(self):
        m = export_manifest(_corpus(_dialog("smd-0"), _dialog("smd-1")))
        assert [e.dialog_id for e in m.entries] == ["smd-0"] * 3 + ["smd-1"] * 3
        assert [e.turn_index for e in m.entries] == [1, 3, 5, 1, 3, 5]


class TestManifestSerialization:
    def test_round_trip(self):
        m = export_manifest(_corpus(_dialog()))
        assert parse_manifest(serialize_manifest(m)) == m

    def test_tab_separated_lines(self):
        text = serialize_manifest(export_manifest(_corpus(_dialog()))).decode()
        lines = text.strip().split("\n")
        assert lines[0].startswith("# corpus_tag=smd:")
        assert lines[1] == "smd-0\t1\thello"


class TestReadPredictions:
    def test_aligned(self):
        m = export_manifest(_corpus(_dialog()))
        preds = read_predictions(b"a\nb\nc\n", m)
        assert preds.responses == ("a", "b", "c")
        assert preds.manifest_digest == m.digest()

    def test_count_mismatch(self):
        m = export_manifest(_corpus(_dialog()))
        with pytest.raises(ParseError, match="expected 3 predictions, got 2"):
            read_predictions(b"a\nb\n", m)

    def test_empty_against_empty(self):
        empty = DialogCorpus(dialogs=(), source_format="smd")
        m = export_manifest(empty)
        assert read_predictions(b"", m).responses == ()

    def test_invalid_utf8_names_offset(self):
        m = export_manifest(_corpus(_dialog()))
        with pytest.raises(ParseError, match="byte 2"):
            read_predictions(b"ok\xff\nb\nc\n", m)
