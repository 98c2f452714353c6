import json
import os
import pathlib
import shutil
import subprocess

import pytest

import trajlab

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
CLI = shutil.which("trajlab") or os.environ.get("TRAJLAB_CLI") or str(ROOT / "build" / "trajlab")


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cli(*args):
    if not os.path.exists(CLI):
        pytest.skip("trajlab CLI not built")
    return subprocess.run([CLI, *args, "--quiet"], check=True, capture_output=True, text=True).stdout


def test_pick_fixture():
    label = trajlab.label_file(FIXTURES / "pick_s1.trjl")
    assert label["mode_id"] == "pick.s1_straightforward"
    assert label["success_once"] is True


def test_truncated_file_raises(tmp_path):
    bad = tmp_path / "bad.trjl"
    bad.write_bytes(b"TRJL\x01")
    with pytest.raises(trajlab.TrajlabError) as err:
        trajlab.label_file(bad)
    assert err.value.kind == "TruncatedFile"
    assert isinstance(err.value, trajlab.TruncatedFile)


def test_label_parity_with_cli():
    for path in sorted(FIXTURES.iterdir()):
        ours = trajlab.label_file(path)
        theirs = json.loads(cli("label", str(path)))
        assert canonical(ours) == canonical(theirs), path.name


def test_label_dir_and_stats_parity(tmp_path):
    batch = trajlab.label_dir(FIXTURES, workers=4)
    assert not batch["failures"]
    assert len(batch["labels"]) == len(list(FIXTURES.iterdir()))
    labels_file = tmp_path / "labels.jsonl"
    labels_file.write_text(cli("label", str(FIXTURES)))
    frame = trajlab.stats_frame(batch["labels"], group_by="task")
    rows = frame.to_dict("records") if hasattr(frame, "to_dict") else frame
    tables = json.loads(cli("stats", str(labels_file), "--group-by", "task", "--format", "json"))
    expected = [(t["subtask"], r["episodes"], r["SoR"]) for t in tables["tables"] for r in t["rows"]]
    assert [(r["subtask"], r["N"], r["SoR"]) for r in rows] == expected


def test_stats_all_s1_and_permutation():
    label = trajlab.label_file(FIXTURES / "pick_s1.trjl")
    labels = []
    for i in range(5):
        l = dict(label)
        l["episode_id"] = f"e{i}"
        labels.append(l)
    frame = trajlab.stats_frame(labels)
    rows = frame.to_dict("records") if hasattr(frame, "to_dict") else frame
    assert [r["SoR"] for r in rows] == [100.0]
    again = trajlab.stats_frame(list(reversed(labels)))
    assert (again.to_dict("records") if hasattr(again, "to_dict") else again) == rows
    with pytest.raises(trajlab.TrajlabError):
        trajlab.stats_frame([])


def test_filter_and_thresholds():
    batch = trajlab.label_dir(FIXTURES)
    spec = {"allow": [{"subtask": "Pick", "modes": ["pick.s1_straightforward"]}], "quota_per_target": 1}
    manifest = trajlab.filter(batch["labels"], spec)
    assert len(manifest["entries"]) == 1
    with pytest.raises(trajlab.TrajlabError):
        trajlab.filter(batch["labels"], {"allow": []})
    th = trajlab.thresholds_default()
    assert th["contact_eps"] > 0
    strict = trajlab.label_file(FIXTURES / "pick_s1.trjl", thresholds={"contact_eps": 1e9})
    assert strict["mode_id"] == "pick.s2_winding"
