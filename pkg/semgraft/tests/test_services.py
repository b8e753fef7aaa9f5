from semgraft.services import db
from semgraft.services.manifest import MANIFEST_SUFFIX, read_manifest, write_manifest
from semgraft.services.textio import read_lines, write_lines
from semgraft.services.workers import map_ordered


def square(x: int) -> int:
    return x * x


def test_map_ordered_keeps_input_order():
    items = list(range(100))
    assert list(map_ordered(square, items, jobs=1)) == [x * x for x in items]
    assert list(map_ordered(square, items, jobs=3)) == [x * x for x in items]
    assert list(map_ordered(square, [], jobs=3)) == []


def test_lines_round_trip(tmp_path):
    path = tmp_path / "nested" / "f.txt"
    write_lines(path, ["a b", "", "c"])
    assert path.read_text(encoding="utf-8") == "a b\n\nc\n"
    assert read_lines(path) == ["a b", "", "c"]


def test_manifest(tmp_path):
    artifact = tmp_path / "grammar.scfg"
    artifact.write_text("", encoding="utf-8")
    path = write_manifest(artifact, "extract", config={"mode": "samt"}, counts={"rules": 4})
    assert path.name == "grammar.scfg" + MANIFEST_SUFFIX
    doc = read_manifest(artifact)
    assert doc["stage"] == "extract"
    assert doc["counts"] == {"rules": 4}
    assert "sacrebleu" in doc["versions"]
    assert artifact.read_text(encoding="utf-8") == ""


def test_run_log(tmp_path):
    path = str(tmp_path / "runs.db")
    db.init_db(path)
    db.insert_pipeline_run(path, "r1", {"pipeline_status": "completed"})
    db.insert_pipeline_run(path, "r1", {"pipeline_status": "completed_with_errors"})
    assert db.list_pipeline_runs(path) == ["r1"]
    stored = db.fetch_pipeline_run(path, "r1")
    assert stored["report"] == {"pipeline_status": "completed_with_errors"}
    assert stored["pipeline_status"] == "completed_with_errors"
    assert stored["modes"] == [] and stored["scores"] == {}
    assert db.fetch_pipeline_run(path, "missing") is None


def run_report(status, bleu_by_mode):
    modes = {
        mode: {
            "extract": {"status": "ok", "rules": 10},
            "decode": {"status": "ok", "untranslatable": 0},
            "bleu": {"status": "ok", "bleu": b} if b is not None else {"status": "failed", "error": "x"},
        }
        for mode, b in bleu_by_mode.items()
    }
    return {"pipeline_status": status, "modes": modes, "summary": {"stages_failed": [], "ordering": {"holds": True}}}


def test_run_log_scores_queryable_by_mode(tmp_path):
    path = str(tmp_path / "runs.db")
    db.init_db(path)
    db.insert_pipeline_run(path, "a", run_report("completed", {"samt": 0.2, "samt+sem": 0.3}))
    db.insert_pipeline_run(path, "b", run_report("completed", {"samt": 0.25, "samt+sem": None}))
    db.insert_pipeline_run(path, "c", run_report("completed_with_errors", {"hiero": 0.1}))

    assert db.best_run_for_mode(path, "samt") == ("b", 0.25)
    assert db.best_run_for_mode(path, "samt+sem") == ("a", 0.3)
    assert db.best_run_for_mode(path, "samt+mod") is None
    assert db.list_pipeline_runs(path, status="completed_with_errors") == ["c"]
    stored = db.fetch_pipeline_run(path, "b")
    assert stored["modes"] == ["samt", "samt+sem"]
    assert stored["scores"]["samt+sem"] == {"bleu": None, "rules": 10, "untranslatable": 0}

    # replacing a run replaces its per-mode rows
    db.insert_pipeline_run(path, "a", run_report("completed", {"hiero": 0.05}))
    assert db.best_run_for_mode(path, "samt+sem") is None
