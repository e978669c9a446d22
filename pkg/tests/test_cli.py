import json
import logging

from scriptor.cli import main
from scriptor.features import read_feature_table_file
from scriptor.report import format_mean_sd, render_text
from scriptor.synth import (
    StrokeScript,
    cohort_spec_to_dict,
    generate_recording,
    idle,
    in_air,
    on_paper,
)
from scriptor.trace import ManifestEntry, write_manifest, write_recording


def write_one_recording(dir_path, pid="P01", group="CL", task=1, seed=0):
    plans = (
        on_paper(160, (0, 0), (400, 300), (200, 600)),
        in_air(48, (400, 300), (600, 100)),
        on_paper(80, (600, 100), (900, 400), 350),
        idle(200),
        on_paper(80, (950, 450), (1200, 500), 500),
    )
    rec, _ = generate_recording(
        StrokeScript(plans), participant_id=pid, task_id=task, group=group, seed=seed
    )
    path = dir_path / f"{pid}_task{task}.csv"
    write_recording(rec, path)
    return ManifestEntry(path.name, pid, rec.group, task)


def make_spec_json(tmp_path, sizes=(3, 3, 4), seed=11):
    from scriptor.synth import CohortSpec, GroupProfile, TargetSpec

    def profile(d, t, p):
        return GroupProfile(TargetSpec(d, 1.5), TargetSpec(t, 500.0), TargetSpec(p, 12.0))

    spec = CohortSpec(
        group_sizes={"CL": sizes[0], "SEV": sizes[1], "NOR": sizes[2]},
        profiles={
            1: {
                "CL": profile(14.0, 9000.0, 350.0),
                "SEV": profile(9.0, 7000.0, 420.0),
                "NOR": profile(4.0, 5000.0, 480.0),
            },
            2: {
                "CL": profile(20.0, 10000.0, 340.0),
                "SEV": profile(12.0, 8000.0, 410.0),
                "NOR": profile(7.0, 6000.0, 460.0),
            },
        },
        seed=seed,
    )
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(cohort_spec_to_dict(spec)), encoding="utf-8")
    return path, spec


def test_extract_single_file(tmp_path):
    entry = write_one_recording(tmp_path)
    manifest = tmp_path / "manifest.csv"
    write_manifest([entry], manifest)
    out = tmp_path / "features.csv"
    assert main(["extract", "--manifest", str(manifest), "--out", str(out)]) == 0
    rows = read_feature_table_file(out)
    assert len(rows) == 1
    assert rows[0].participant_id == "P01"
    assert rows[0].features.Ndown == 3


def test_extract_missing_file_fails_and_names_it(tmp_path, caplog):
    entry = write_one_recording(tmp_path)
    ghost = ManifestEntry("missing.csv", "P99", entry.group, 2)
    manifest = tmp_path / "manifest.csv"
    write_manifest([entry, ghost], manifest)
    out = tmp_path / "features.csv"
    with caplog.at_level(logging.ERROR, logger="scriptor"):
        code = main(["extract", "--manifest", str(manifest), "--out", str(out)])
    assert code == 1
    assert "missing.csv" in caplog.text
    # the valid file still produced a row
    assert len(read_feature_table_file(out)) == 1


def test_extract_dump_traits(tmp_path):
    entry = write_one_recording(tmp_path)
    manifest = tmp_path / "manifest.csv"
    write_manifest([entry], manifest)
    out = tmp_path / "features.csv"
    dump = tmp_path / "traits"
    assert main(
        ["extract", "--manifest", str(manifest), "--out", str(out), "--dump-traits", str(dump)]
    ) == 0
    dumped = list(dump.glob("*.csv"))
    assert len(dumped) == 1
    assert dumped[0].read_text().startswith("kind,start_t,end_t,n_samples")


def test_env_override_idle_threshold(tmp_path, monkeypatch):
    entry = write_one_recording(tmp_path)
    manifest = tmp_path / "manifest.csv"
    write_manifest([entry], manifest)
    out_default = tmp_path / "f1.csv"
    out_env = tmp_path / "f2.csv"
    assert main(["extract", "--manifest", str(manifest), "--out", str(out_default)]) == 0
    monkeypatch.setenv("SCRIPTOR_IDLE_THRESHOLD_MS", "10000")
    assert main(["extract", "--manifest", str(manifest), "--out", str(out_env)]) == 0
    rows_default = read_feature_table_file(out_default)
    rows_env = read_feature_table_file(out_env)
    assert rows_default[0].features.Nidle == 1
    assert rows_env[0].features.Nidle == 0  # huge threshold: no idle detected


def test_full_chain_and_format_consistency(tmp_path):
    spec_path, spec = make_spec_json(tmp_path)
    data_dir = tmp_path / "cohort"
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(data_dir)]) == 0
    manifest = data_dir / "manifest.csv"
    assert manifest.exists()
    features = tmp_path / "features.csv"
    assert main(["extract", "--manifest", str(manifest), "--out", str(features)]) == 0
    rows = read_feature_table_file(features)
    assert len(rows) == sum((3, 3, 4)) * 2  # participants x tasks

    out_json = tmp_path / "analysis.json"
    out_text = tmp_path / "analysis.txt"
    assert main(["analyze", "--features", str(features), "--out", str(out_json), "--format", "json"]) == 0
    assert main(["analyze", "--features", str(features), "--out", str(out_text), "--format", "text"]) == 0

    document = json.loads(out_json.read_text())
    assert out_text.read_text() == render_text(document)  # identical numbers

    rendered = tmp_path / "rendered.txt"
    assert main(["report", "--analysis", str(out_json), "--out", str(rendered)]) == 0
    assert rendered.read_text() == out_text.read_text()


def test_analyze_identical_groups_all_null(tmp_path):
    from scriptor.features import FeatureRow, FeatureVector, write_feature_table
    from scriptor.trace import Group

    fv = FeatureVector(
        Pmin=100, Pmax=200, Pavg=150.0, Psd=10.0, P10=110, P90=190,
        Nup=2, Ndown=3, Nidle=0, Tup=100, Tdown=200, Tidle=0, Ttotal=300,
        Sbb=40.0, Savg=3.0, Stotal=6.0, Iavg=30.0,
    )
    rows = [
        FeatureRow(f"{g}{i}", Group(g), 1, fv)
        for g in ("CL", "SEV", "NOR")
        for i in range(3)
    ]
    features = tmp_path / "features.csv"
    write_feature_table(rows, features)
    out = tmp_path / "analysis.json"
    assert main(["analyze", "--features", str(features), "--out", str(out), "--format", "json"]) == 0
    document = json.loads(out.read_text())
    assert document["reports"], "expected reports"
    for report in document["reports"]:
        assert report["p"] == 1.0
        assert report["significant"] is False
        for pair in report["pairwise"]:
            assert pair["p_bonferroni"] == 1.0


def test_analyze_rejects_single_group(tmp_path, caplog):
    from scriptor.features import FeatureRow, FeatureVector, write_feature_table
    from scriptor.trace import Group

    fv = FeatureVector(
        Pmin=1, Pmax=2, Pavg=1.5, Psd=0.5, P10=1, P90=2,
        Nup=0, Ndown=1, Nidle=0, Tup=0, Tdown=10, Tidle=0, Ttotal=10,
        Sbb=1.0, Savg=0.0, Stotal=0.0, Iavg=45.0,
    )
    rows = [FeatureRow(f"P{i}", Group.CL, 1, fv) for i in range(4)]
    features = tmp_path / "features.csv"
    write_feature_table(rows, features)
    with caplog.at_level(logging.ERROR, logger="scriptor"):
        assert main(["analyze", "--features", str(features), "--out", str(tmp_path / "x.json")]) == 1
    assert "2 groups" in caplog.text


def test_report_formats_table_cell(tmp_path):
    document = {
        "alpha": 0.05,
        "reports": [
            {
                "task": 1,
                "scope": "category",
                "name": "ductus",
                "significant": True,
                "effect": "group effect on ductus (task 1)",
                "F": 13.222,
                "df": [2, 46],
                "p": 0.00029,
                "descriptives": [
                    {"group": "CL", "n": 14, "mean": 26.2857142857, "sd": 3.48},
                    {"group": "SEV", "n": 15, "mean": 14.978, "sd": 3.362},
                ],
                "pairwise": [],
                "excluded": [],
            }
        ],
        "skipped": [],
    }
    path = tmp_path / "analysis.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    out = tmp_path / "report.txt"
    assert main(["report", "--analysis", str(path), "--out", str(out)]) == 0
    text = out.read_text()
    assert "26.286 (3.480)" in text
    assert "F(2, 46) = 13.222" in text


def test_report_empty_analysis(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("{}", encoding="utf-8")
    assert main(["report", "--analysis", str(path)]) == 0
    out = capsys.readouterr().out
    assert "(no reports)" in out


def test_report_rejects_malformed_json(tmp_path, caplog):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with caplog.at_level(logging.ERROR, logger="scriptor"):
        assert main(["report", "--analysis", str(path)]) == 1


def test_synth_default_spec_writes_spec_copy(tmp_path):
    # default demo cohort is big; use an explicit tiny spec instead and
    # check the synth command round-trips it to disk
    spec_path, _ = make_spec_json(tmp_path, sizes=(2, 2, 2))
    out_dir = tmp_path / "out"
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(out_dir)]) == 0
    saved = json.loads((out_dir / "cohort_spec.json").read_text())
    assert saved["group_sizes"] == {"CL": 2, "SEV": 2, "NOR": 2}
    assert (out_dir / "manifest.csv").exists()
    assert len(list(out_dir.glob("*_task*.csv"))) == 12


def test_synth_seed_override(tmp_path):
    spec_path, spec = make_spec_json(tmp_path, sizes=(2, 2, 2))
    a_dir, b_dir, c_dir = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(a_dir), "--seed", "77"]) == 0
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(b_dir), "--seed", "77"]) == 0
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(c_dir), "--seed", "78"]) == 0
    name = "CL01_task1.csv"
    assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()
    assert (a_dir / name).read_bytes() != (c_dir / name).read_bytes()


def test_format_mean_sd_examples():
    assert format_mean_sd(26.2857142857, 3.48) == "26.286 (3.480)"
    assert format_mean_sd(2.0, 1.0) == "2.000 (1.000)"
