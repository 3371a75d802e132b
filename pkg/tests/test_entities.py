from hypothesis import given, settings
from hypothesis import strategies as st

from exsearch.crf import Entity, decode_entities

TAGS = ["O", "B-EXID", "I-EXID", "B-EXNAME", "I-EXNAME"]


def test_single_id_entity():
    assert decode_entities(["0x800A03EC", "saveas"], ["B-EXID", "O"]) == [Entity("ID", 0, 1, "0x800A03EC")]


def test_orphan_inside_is_repaired():
    assert decode_entities(["how", "TypeError"], ["O", "I-EXNAME"]) == [Entity("NAME", 1, 2, "TypeError")]


def test_all_outside():
    assert decode_entities(["a", "b"], ["O", "O"]) == []


def test_class_switch_starts_new_entity():
    ents = decode_entities(["a", "b", "c"], ["B-EXID", "I-EXNAME", "I-EXNAME"])
    assert [(e.kind, e.start, e.end) for e in ents] == [("ID", 0, 1), ("NAME", 1, 3)]


def test_surface_from_offsets():
    text = "error: Foo.Bar"
    ents = decode_entities(["error", ":", "Foo.Bar"], ["B-EXNAME", "I-EXNAME", "O"], text,
                           [(0, 5), (5, 6), (7, 14)])
    assert ents[0].surface == "error:"


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TAGS), min_size=1, max_size=12))
def test_entities_cover_exactly_the_tagged_positions(tags):
    tokens = [f"t{i}" for i in range(len(tags))]
    ents = decode_entities(tokens, tags)
    covered = [i for e in ents for i in range(e.start, e.end)]
    assert covered == [i for i, t in enumerate(tags) if t != "O"]
    for e in ents:
        assert e.end > e.start
        suffix = "EXID" if e.kind == "ID" else "EXNAME"
        assert all(tags[i].endswith(suffix) for i in range(e.start, e.end))
        assert all(tags[i].startswith("I-") for i in range(e.start + 1, e.end))
