import json

import pytest

from vtmm.errors import ConcurrentWrite, CorruptProject, UnknownRevision, ValidationFailed
from vtmm.scoring import AnnotatedFeature, AnnotationSet
from vtmm.store import (
    active_annotations,
    commit_annotations,
    diff,
    get_revision,
    list_revisions,
    open_or_init,
    update_paths,
    write_lock,
)


def snap(classes):
    return AnnotationSet(classes={
        label: [AnnotatedFeature(text=t, weight=w, class_label=label) for t, w in feats]
        for label, feats in classes.items()
    })


def test_init_fresh_project(tmp_path):
    project = open_or_init(tmp_path)
    assert project.active_revision == 0
    assert active_annotations(project).classes == {}


def test_reopen_preserves_active_revision(tmp_path):
    project = open_or_init(tmp_path)
    commit_annotations(project, snap({"a": [("x", 1.0)]}), "add a")
    reopened = open_or_init(tmp_path)
    assert reopened.active_revision == project.active_revision == 1


def test_corrupt_manifest(tmp_path):
    open_or_init(tmp_path)
    (tmp_path / "project.json").write_text("{ not json")
    with pytest.raises(CorruptProject):
        open_or_init(tmp_path)


def test_corrupt_revision_file(tmp_path):
    project = open_or_init(tmp_path)
    (tmp_path / "revisions" / "0000.json").write_text('{"mangled": true}')
    with pytest.raises(CorruptProject):
        get_revision(project, 0)


def test_commit_appends_and_isolates(tmp_path):
    project = open_or_init(tmp_path)
    first = snap({"a": [("x", 1.0)], "b": [("y", 1.0)]})
    commit_annotations(project, first, "initial")
    before_b = json.dumps(get_revision(project, 1).annotations.to_dict()["classes"]["b"])

    second = snap({"a": [("x", 1.0), ("x2", 2.0)], "b": [("y", 1.0)]})
    rev = commit_annotations(project, second, "extend a")
    assert rev == 2
    assert project.active_revision == 2
    # prior revision untouched, other classes byte-identical
    after_b = json.dumps(get_revision(project, 2).annotations.to_dict()["classes"]["b"])
    assert before_b == after_b
    assert len(get_revision(project, 1).annotations.classes["a"]) == 1


def test_commit_identical_snapshot_still_appends(tmp_path):
    project = open_or_init(tmp_path)
    s = snap({"a": [("x", 1.0)]})
    r1 = commit_annotations(project, s, "one")
    r2 = commit_annotations(project, s, "two")
    assert (r1, r2) == (1, 2)
    assert [r["revision"] for r in list_revisions(project)] == [0, 1, 2]


def test_commit_validation_failure(tmp_path):
    project = open_or_init(tmp_path)
    bad = AnnotationSet(common_features=[("ok", 0.0)])
    with pytest.raises(ValidationFailed) as exc:
        commit_annotations(project, bad, "bad")
    assert exc.value.diagnostics
    assert project.active_revision == 0


def test_revision_ids_strictly_increase(tmp_path):
    project = open_or_init(tmp_path)
    ids = [commit_annotations(project, snap({"a": [(f"t{i}", 1.0)]}), f"{i}") for i in range(4)]
    assert ids == sorted(ids) == [1, 2, 3, 4]


def test_unknown_revision(tmp_path):
    project = open_or_init(tmp_path)
    with pytest.raises(UnknownRevision):
        get_revision(project, 99)


def test_diff_reflexive_empty(tmp_path):
    project = open_or_init(tmp_path)
    commit_annotations(project, snap({"a": [("x", 1.0)]}), "one")
    assert diff(project, 1, 1) == []


def test_diff_single_add(tmp_path):
    project = open_or_init(tmp_path)
    commit_annotations(project, snap({"a": [("x", 1.0)]}), "one")
    commit_annotations(project, snap({"a": [("x", 1.0), ("new", 1.0)]}), "two")
    d = diff(project, 1, 2)
    assert len(d) == 1
    assert d[0]["class_label"] == "a"
    assert [f["text"] for f in d[0]["added"]] == ["new"]
    assert d[0]["removed"] == []
    assert d[0]["weight_changes"] == []


def test_diff_weight_change_not_add_remove(tmp_path):
    project = open_or_init(tmp_path)
    commit_annotations(project, snap({"a": [("x", 1.0)]}), "one")
    commit_annotations(project, snap({"a": [("x", 2.0)]}), "two")
    d = diff(project, 1, 2)
    assert d[0]["added"] == [] and d[0]["removed"] == []
    assert d[0]["weight_changes"] == [{"text": "x", "kind": "long-sentence", "from": 1.0, "to": 2.0}]


def test_diff_mirror_images(tmp_path):
    project = open_or_init(tmp_path)
    commit_annotations(project, snap({"a": [("x", 1.0)], "b": [("y", 1.0)]}), "one")
    commit_annotations(project, snap({"a": [("z", 1.0)], "b": [("y", 3.0)]}), "two")
    forward = diff(project, 1, 2)
    backward = diff(project, 2, 1)
    fwd_a = next(d for d in forward if d["class_label"] == "a")
    bwd_a = next(d for d in backward if d["class_label"] == "a")
    assert [f["text"] for f in fwd_a["added"]] == [f["text"] for f in bwd_a["removed"]]
    assert [f["text"] for f in fwd_a["removed"]] == [f["text"] for f in bwd_a["added"]]
    fwd_b = next(d for d in forward if d["class_label"] == "b")
    bwd_b = next(d for d in backward if d["class_label"] == "b")
    assert fwd_b["weight_changes"] == [{"text": "y", "kind": "long-sentence", "from": 1.0, "to": 3.0}]
    assert bwd_b["weight_changes"] == [{"text": "y", "kind": "long-sentence", "from": 3.0, "to": 1.0}]


def test_diff_unknown_revision(tmp_path):
    project = open_or_init(tmp_path)
    with pytest.raises(UnknownRevision):
        diff(project, 0, 5)


def test_write_lock_blocks_second_writer(tmp_path):
    project = open_or_init(tmp_path)
    with write_lock(project.root):
        with pytest.raises(ConcurrentWrite):
            commit_annotations(project, snap({"a": [("x", 1.0)]}), "blocked")


def test_update_paths_roundtrip(tmp_path):
    project = open_or_init(tmp_path / "proj")
    data = tmp_path / "data"
    data.mkdir()
    update_paths(project, dataset=data, checkpoint=data / "net.ckpt", config={"lambda": 2.0})
    reopened = open_or_init(tmp_path / "proj")
    assert reopened.resolve(reopened.dataset) == data.resolve()
    assert reopened.config["lambda"] == 2.0


def test_historical_revision_reconstructable(tmp_path):
    project = open_or_init(tmp_path)
    s1 = snap({"a": [("x", 1.0)]})
    commit_annotations(project, s1, "one")
    commit_annotations(project, snap({"a": [("x", 1.0), ("y", -2.0)]}), "two")
    historical = get_revision(project, 1).annotations
    assert historical.to_dict() == s1.to_dict()
