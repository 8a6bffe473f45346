import csv
import json

import pytest

from rectify_nd import cli

CORPUS = {name: job for name, job in cli.bundled_jobs()}


def write_job(tmp_path, job, name="job"):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(job))
    return str(p)


def read_report(out, name):
    return json.loads((out / f"{name}.report.json").read_text())


def test_analyze_e4_sec(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["analyze", "--job", write_job(tmp_path, CORPUS["e4_sec"], "e4"), "--out-dir", str(out)])
    assert code == 0
    rep = read_report(out, "e4")
    assert abs(rep["c"]) < 1e-8
    assert rep["rho2_coefficients"] == pytest.approx([1, 0, 1], abs=1e-8)
    with open(out / "e4.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "t", "s", "rho2", "tangential", "normal_inner", "normal_len",
        "mu_1_measured", "mu_2_measured", "mu_1_predicted", "mu_2_predicted",
        "condition_residual",
    ]  # fmt: skip
    assert len(rows) == 202


def test_analyze_constant_helix_exit_1(tmp_path):
    assert cli.main(["analyze", "--job", write_job(tmp_path, CORPUS["e4_constant_helix"]), "--out-dir", str(tmp_path)]) == 1


def test_malformed_json_exit_64(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["analyze", "--job", str(p), "--out-dir", str(tmp_path)]) == 64
    assert "schema error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "job",
    [
        {"command": "analyze"},
        {"command": "analyze", "curve": {"dimension": 3, "family": "Spiral", "params": {}, "domain": [0, 1]}},
        {**CORPUS["e4_sec"], "grid": {"t_min": -1, "t_max": 1, "count": 5}},
        {**CORPUS["e4_sec"], "tolerances": {"certify": -1}},
        {**CORPUS["e4_sec"], "command": "integrate"},
    ],
)
def test_schema_violations_exit_64(tmp_path, job):
    assert cli.main(["analyze", "--job", write_job(tmp_path, job), "--out-dir", str(tmp_path)]) == 64


def test_numerical_failure_exit_65(tmp_path, capsys):
    job = {"command": "construct", "construction": "kappa_last", "dimension": 4, "kappas": [1, 1], "b": -1, "c": 0}
    assert cli.main(["construct", "--job", write_job(tmp_path, job), "--out-dir", str(tmp_path)]) == 65
    assert "DomainError" in capsys.readouterr().err


def test_inconclusive_exit_2(tmp_path):
    # the helix residual sits between the thresholds when they bracket it
    args = ["--tol-certify", "1e-3", "--tol-falsify", "10"]
    path = write_job(tmp_path, CORPUS["e4_constant_helix"])
    assert cli.main(["analyze", "--job", path, "--out-dir", str(tmp_path), *args]) == 2


def test_csv_is_deterministic(tmp_path):
    path = write_job(tmp_path, CORPUS["e4_case_i_condition"])
    cli.main(["condition", "--job", path, "--out-dir", str(tmp_path / "a")])
    cli.main(["condition", "--job", path, "--out-dir", str(tmp_path / "b")])
    a = (tmp_path / "a" / "job.csv").read_bytes()
    assert a == (tmp_path / "b" / "job.csv").read_bytes()
    first = a.decode().splitlines()[1].split(",")
    assert len(first[0]) > 10  # 17 significant digits


def test_corpus_subset_with_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("RECTIFY_ND_THREADS", "2")
    names = ["e3_helix", "e4_constant_condition", "e4_case_i_condition"]
    for n in names:
        (tmp_path / f"{n}.json").write_text(json.dumps(CORPUS[n]))
    path = write_job(tmp_path, {"command": "corpus", "jobs": [f"{n}.json" for n in names]}, "corpus_job")
    assert cli.main(["corpus", "--job", path, "--out-dir", str(tmp_path / "out")]) == 0
    summary = json.loads((tmp_path / "out" / "corpus.json").read_text())
    assert [j["name"] for j in summary["jobs"]] == names
    assert all(j["ok"] for j in summary["jobs"])


def test_every_bundled_job_declares_expectation():
    assert len(CORPUS) >= 15
    for name, job in CORPUS.items():
        assert job["command"] in cli.COMMANDS, name
        assert job["expect"] in (0, 1, 2), name
