"""Document serialization: canonical bytes, lossless import, hard rejections.

Golden files under tests/goldens/ are regenerated by
scripts/freeze_goldens.py; a mismatch means the on-disk format moved.
"""

import json
import pathlib
import random

import pytest

import progen
from geotrace.checks import check_all
from geotrace.docio import ImportFailure, deserialize, dump, load, serialize
from geotrace.execute import RunConfig, run, run_text

GOLDENS = pathlib.Path(__file__).parent / "goldens"

WORKED_CONFIG = RunConfig(seed=0, channel_inputs={"c": (8,)},
                          message_offset={"c": 83, "d": 36})


def corpus_diagrams(n, seed):
    rng = random.Random(seed)
    for _ in range(n):
        prog, cfg = progen.race_free_program(rng)
        yield run(prog, RunConfig(seed=rng.randrange(100), **cfg))


# ---- round trips ------------------------------------------------------------

def test_roundtrip_is_lossless():
    for d in corpus_diagrams(40, seed=3):
        assert deserialize(serialize(d)) == d


def test_serialization_is_a_byte_fixpoint():
    for d in corpus_diagrams(20, seed=9):
        blob = serialize(d)
        assert serialize(deserialize(blob)) == blob


def test_bytes_do_not_depend_on_dict_history():
    d = run_text("t:(skip)", RunConfig(seed=7, channel_inputs={"b": (1,), "a": (2,)}))
    e = run_text("t:(skip)", RunConfig(seed=7, channel_inputs={"a": (2,), "b": (1,)}))
    assert serialize(d) == serialize(e)


def test_accepts_text_and_bytes():
    d = run_text("t:(skip)", RunConfig(seed=0))
    blob = serialize(d)
    assert deserialize(blob.decode("ascii")) == d
    assert deserialize(blob + b"\n") == d


def test_huge_values_survive_as_strings():
    big = 10 ** 40
    d = run_text(f"t:(new x; x := {big}; dispose x)", RunConfig(seed=0))
    doc = json.loads(serialize(d))
    values = [a["value"] for a in doc["arrows"] if a["value"] == str(big)]
    assert values, "expected the literal to ride an arrow as a decimal string"
    d2 = deserialize(serialize(d))
    assert any(a.value == big for a in d2.arrows)


def test_dump_and_load(tmp_path):
    d = run_text("t:(new x; x := 2; dispose x)", RunConfig(seed=5))
    path = tmp_path / "out.diagram.json"
    dump(d, path)
    raw = path.read_bytes()
    assert raw.endswith(b"\n")
    assert load(path) == d


# ---- rejections -------------------------------------------------------------

def fresh_doc():
    return json.loads(serialize(run_text(
        "t:(new x; x := 1; dispose x)", RunConfig(seed=0))))


def reject(doc):
    with pytest.raises(ImportFailure) as err:
        deserialize(json.dumps(doc))
    return str(err.value)


def test_rejects_wrong_version():
    doc = fresh_doc()
    doc["version"] = 2
    assert reject(doc) == "unsupported version: 2 (this reader speaks 1)"


def test_rejects_dangling_arrow_ref():
    doc = fresh_doc()
    doc["arrows"][0]["head"] = 999
    n = len(doc["events"])
    assert reject(doc) == (f"dangling id: arrows[0].head is 999, "
                           f"but only {n} exist")


def test_rejects_dangling_event_ref():
    doc = fresh_doc()
    doc["events"][0]["lifeline"] = 3
    assert reject(doc).startswith("dangling id: events[0].lifeline is 3")


def test_rejects_noncanonical_row_order():
    doc = fresh_doc()
    doc["transactions"][1]["row"] = doc["transactions"][0]["row"]
    assert reject(doc) == ("non-canonical row order: transaction 1 "
                           "has row 1 after row 1")


def test_rejects_shuffled_ids():
    doc = fresh_doc()
    doc["events"][0]["id"] = 5
    assert reject(doc) == "ids out of order: events[0] has id 5"


def test_rejects_garbage():
    with pytest.raises(ImportFailure) as err:
        deserialize(b"]]]")
    assert str(err.value).startswith("not a diagram document:")
    with pytest.raises(ImportFailure) as err:
        deserialize(b"[1,2,3]")
    assert "top level is not an object" in str(err.value)


def test_rejects_missing_table():
    doc = fresh_doc()
    del doc["slices"]
    assert reject(doc).startswith("not a diagram document:")


# ---- golden files -----------------------------------------------------------

def test_skip_golden_matches():
    d = run_text("t:(skip)", RunConfig(seed=0))
    assert len(d.lifelines) == 1
    assert len(d.transactions) == 1
    assert d.violations == []
    golden = (GOLDENS / "skip.diagram.json").read_bytes()
    assert serialize(d) + b"\n" == golden


def test_worked_example_golden_matches_fresh_run():
    src = (GOLDENS / "worked_example.gt").read_text()
    fresh = run_text(src, WORKED_CONFIG)
    stored = load(GOLDENS / "worked_example.diagram.json")
    assert stored == fresh
    assert serialize(fresh) + b"\n" == \
        (GOLDENS / "worked_example.diagram.json").read_bytes()


def test_deadlock_golden_matches_fresh_run():
    src = (GOLDENS / "deadlock.gt").read_text()
    fresh = run_text(src, RunConfig(seed=0))
    assert [v.code for v in fresh.violations] == ["DEADLOCK_CYCLE"]
    assert fresh.violations[0].witness == ("t", "b", "u", "a", "t")
    assert serialize(fresh) + b"\n" == \
        (GOLDENS / "deadlock.diagram.json").read_bytes()


def test_planted_fixture_loads_and_reports():
    d = load(GOLDENS / "planted_seq_back.diagram.json")
    found = check_all(d)
    assert [v.code for v in found] == ["SEQ_BACK_ARROW"]


def test_navigation_golden_is_current():
    from geotrace import query
    d = load(GOLDENS / "worked_example.diagram.json")
    nav = json.loads((GOLDENS / "worked_example.navigation.json").read_text())
    assert len(nav["events"]) == len(d.events)
    for entry in nav["events"]:
        eid = entry["event"]
        got = [{"from": s.from_event, "via": s.via, "to": s.to_event,
                "direction": s.direction, "label": s.label}
               for s in query.immediate_causes(d, eid)]
        assert got == entry["back"], f"back steps moved for event {eid}"
        got = [{"from": s.from_event, "via": s.via, "to": s.to_event,
                "direction": s.direction, "label": s.label}
               for s in query.immediate_effects(d, eid)]
        assert got == entry["forward"], f"forward steps moved for event {eid}"
        assert sorted(query.causal_past(d, eid)) == entry["past"]
