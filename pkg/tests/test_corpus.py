import pytest

from crux.corpus import CorpusError, CorpusStore, default_wall
from crux.format import parse_document, serialize_document
from crux.model import GradeLabel
from conftest import ladder_route


@pytest.fixture()
def store(tmp_path):
    s = CorpusStore(tmp_path / "corpus")
    for k, (diff, grade) in enumerate([(0.2, "5.8"), (0.55, "5.10a")]):
        route, wall = ladder_route(f"r{k}", diff, GradeLabel.parse(grade))
        s.save_route(route, wall)
    return s


def test_default_document(tmp_path):
    s = CorpusStore(tmp_path / "fresh")
    wall, routes = s.current_document()
    assert routes == ()
    assert wall == default_wall()


def test_put_and_get_document(store):
    route, wall = ladder_route("work", 0.4, None)
    store.put_document(wall, (route,))
    wall2, routes2 = store.current_document()
    assert serialize_document(wall2, routes2) == serialize_document(wall, (route,))


def test_corpus_entries_and_grade_sets(store):
    entries = store.corpus_entries()
    assert {r.name for r, _, _ in entries} == {"r0", "r1"}
    sets = store.grade_sets()
    assert [str(s.label) for s in sets] == ["5.8", "5.10a"]


def test_record_ascent_and_lock(store):
    for i in range(49):
        r = store.record_ascent("r0", lock_threshold=50)
        assert not r.grade_locked
    r = store.record_ascent("r0", lock_threshold=50)
    assert r.exposure_count == 50 and r.grade_locked
    assert store.is_locked("r0")
    # state survives reload
    r2, _ = store.find_route("r0")
    assert r2.exposure_count == 50 and r2.grade_locked


def test_record_ascent_unknown_route(store):
    with pytest.raises(CorpusError) as exc:
        store.record_ascent("ghost")
    assert exc.value.code == "NOT_FOUND"


def test_atomic_write_leaves_no_temp_files(store):
    route, wall = ladder_route("work", 0.4, None)
    store.put_document(wall, (route,))
    leftovers = list(store.root.glob("*.tmp"))
    assert leftovers == []


def test_locked_only_filter(store):
    assert store.grade_sets(locked_only=True) == []
    for _ in range(50):
        store.record_ascent("r0")
    locked = store.grade_sets(locked_only=True)
    assert [str(s.label) for s in locked] == ["5.8"]


def test_saved_files_are_canonical(store):
    path = store.root / "r0.crux"
    text = path.read_text()
    res = parse_document(text)
    assert res.ok
    assert serialize_document(res.wall, res.routes) == text
