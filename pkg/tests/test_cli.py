import json

import pytest

from converge.cli import main
from converge.corpus import fixture_path
from converge.jsonio import read_json


def run_cli(*argv):
    return main(list(argv))


def test_run_builds_bundle(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = run_cli("run", "--corpus", str(fixture_path("corpus_water11")),
                   "--out", str(out), "--seed", "42")
    assert code == 0
    line = capsys.readouterr().out.strip()
    assert "written to" in line and str(out) in line
    manifest = read_json(out / "manifest.json")
    assert line.startswith(f"bundle {manifest['bundle_fingerprint'][:12]}")


def test_graph_stdout_matches_artifact(water11_bundle, capsys):
    assert run_cli("graph", "--bundle", str(water11_bundle)) == 0
    printed = capsys.readouterr().out
    assert printed.encode() == (water11_bundle / "graph_above.json").read_bytes()


def test_graph_below_mode_and_out_file(water11_bundle, tmp_path):
    dest = tmp_path / "below.json"
    code = run_cli("graph", "--bundle", str(water11_bundle),
                   "--mode", "below", "--out", str(dest))
    assert code == 0
    assert dest.read_bytes() == (water11_bundle / "graph_below.json").read_bytes()


def test_layout_reseed_rewrites_bundle(bundle_copy, capsys):
    before = (bundle_copy / "layout.json").read_bytes()
    manifest_before = read_json(bundle_copy / "manifest.json")
    assert run_cli("layout", "--bundle", str(bundle_copy), "--seed", "7") == 0
    assert "layout written" in capsys.readouterr().out
    after = (bundle_copy / "layout.json").read_bytes()
    assert after != before
    assert read_json(bundle_copy / "layout.json")["params"]["seed"] == 7
    manifest_after = read_json(bundle_copy / "manifest.json")
    assert manifest_after["artifacts"]["layout.json"] != manifest_before["artifacts"]["layout.json"]


def test_temporal_stdout_matches_artifact(water11_bundle, capsys):
    assert run_cli("temporal", "--bundle", str(water11_bundle)) == 0
    assert capsys.readouterr().out.encode() == (water11_bundle / "ratio.json").read_bytes()


def test_survey_round_trip(bundle_copy, tmp_path, capsys):
    assert run_cli("survey", "export", "--bundle", str(bundle_copy)) == 0
    survey = json.loads(capsys.readouterr().out)
    first = survey["items"][0]["id"]
    responses = tmp_path / "responses.json"
    responses.write_text(json.dumps(
        {"responses": [{"item_id": first, "reviewer": "r1", "verdict": "disagree"}]}
    ))
    assert run_cli("survey", "import", "--bundle", str(bundle_copy),
                   "--responses", str(responses)) == 0
    capsys.readouterr()
    updated = read_json(bundle_copy / "survey.json")
    verdicts = {item["id"]: item["verdict"] for item in updated["items"]}
    assert verdicts[first] == "disagree"
    assert updated["stats"]["reviewed"] == 1


def test_survey_import_accepts_bare_list(bundle_copy, tmp_path, capsys):
    survey = read_json(bundle_copy / "survey.json")
    first = survey["items"][0]["id"]
    responses = tmp_path / "responses.json"
    responses.write_text(json.dumps(
        [{"item_id": first, "reviewer": "r1", "verdict": "agree"}]
    ))
    assert run_cli("survey", "import", "--bundle", str(bundle_copy),
                   "--responses", str(responses)) == 0
    capsys.readouterr()
    assert read_json(bundle_copy / "survey.json")["stats"]["agreed"] == 1


def test_report_consistency(water11_bundle, capsys):
    assert run_cli("report", "consistency", "--bundle", str(water11_bundle)) == 0
    payload = json.loads(capsys.readouterr().out)
    assert {"aligned", "statements", "top_by_similarity", "top_by_flows"} <= payload.keys()


def test_ingest_validates_and_writes_corpus(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = run_cli("ingest", str(fixture_path("corpus_planted")), "--out", str(out))
    assert code == 0
    capsys.readouterr()
    assert (out / "corpus.json").exists() and (out / "config.json").exists()


def test_errors_exit_nonzero(tmp_path, capsys):
    code = run_cli("run", "--corpus", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "bundle"))
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")

    code = run_cli("graph", "--bundle", str(tmp_path / "not-a-bundle"))
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_graph_rejects_bad_percentile(water11_bundle, capsys):
    code = run_cli("graph", "--bundle", str(water11_bundle), "--percentile", "0")
    assert code == 1
    assert "percentile" in capsys.readouterr().err
