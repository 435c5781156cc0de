import json
import subprocess
import sys

import pytest
from fastapi.testclient import TestClient

from crux import cli
from crux.corpus import CorpusStore
from crux.model import GradeLabel
from crux.service import create_app
from conftest import ladder_route

POP = {"size": 150, "ability_mean": 1.35, "ability_std": 0.5, "seed": 42}


@pytest.fixture()
def setup(tmp_path):
    corpus = tmp_path / "corpus"
    store = CorpusStore(corpus)
    for k, (diff, grade) in enumerate([(0.2, "5.8"), (0.55, "5.10a"), (0.9, "5.12a")]):
        for j in range(2):
            route, wall = ladder_route(f"c{k}{j}", diff + 0.01 * j, GradeLabel.parse(grade))
            store.save_route(route, wall)
    work_route, work_wall = ladder_route("work", 0.5, None)
    store.put_document(work_wall, (work_route,))
    pop_file = tmp_path / "pop.json"
    pop_file.write_text(json.dumps(POP))
    return store, corpus, corpus / "wall.crux", pop_file


def run_cli(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_canonical_echo(setup, capsys):
    _, _, wall_file, _ = setup
    code, out, err = run_cli(capsys, ["parse", str(wall_file)])
    assert code == 0
    assert out == wall_file.read_text()


def test_parse_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.crux"
    bad.write_text("WALL 3 4.5\nPANEL 0 4.5 90\nHOLD a 1 1 jug 2.0 hand 0\n")
    code, out, err = run_cli(capsys, ["parse", str(bad)])
    assert code == 1
    assert "RANGE" in err


def test_usage_error_exit_64():
    with pytest.raises(SystemExit) as exc:
        cli.main(["grade"])  # missing required args
    assert exc.value.code == 64


def test_unknown_command_exit_64():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 64


def test_beta_parity_with_service(setup, capsys):
    store, corpus, wall_file, _ = setup
    app = create_app(store)
    with TestClient(app) as client:
        doc = client.get("/api/wall").json()
        api = client.post("/api/beta", json={"route": doc["routes"][0]}).json()
    code, out, _ = run_cli(capsys, ["beta", str(wall_file), "--json"])
    assert code == 0
    assert json.loads(out) == api


def test_grade_parity_with_service(setup, capsys):
    store, corpus, wall_file, pop_file = setup
    app = create_app(store)
    with TestClient(app) as client:
        doc = client.get("/api/wall").json()
        api = client.post("/api/grade",
                          json={"route": doc["routes"][0], "seed": 7,
                                "population": POP}).json()
    code, out, _ = run_cli(capsys, ["grade", str(wall_file), "--corpus", str(corpus),
                                    "--seed", "7", "--population", str(pop_file), "--json"])
    assert code == 0
    assert json.loads(out) == api


def test_grade_deterministic_stdout(setup, capsys):
    _, corpus, wall_file, pop_file = setup
    code1, out1, _ = run_cli(capsys, ["grade", str(wall_file), "--corpus", str(corpus),
                                      "--seed", "7", "--population", str(pop_file)])
    code2, out2, _ = run_cli(capsys, ["grade", str(wall_file), "--corpus", str(corpus),
                                      "--seed", "7", "--population", str(pop_file)])
    assert code1 == code2 == 0
    assert out1 == out2


def test_vary_deterministic(setup, capsys):
    _, _, wall_file, _ = setup
    code1, out1, _ = run_cli(capsys, ["vary", str(wall_file), "--intensity", "0.4",
                                      "--seed", "9", "--json"])
    code2, out2, _ = run_cli(capsys, ["vary", str(wall_file), "--intensity", "0.4",
                                      "--seed", "9", "--json"])
    assert code1 == code2 == 0
    assert out1 == out2


def test_simulate_runs(setup, capsys):
    _, _, wall_file, pop_file = setup
    code, out, _ = run_cli(capsys, ["simulate", str(wall_file), "--trials", "50",
                                    "--population", str(pop_file), "--seed", "3", "--json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["trials"] == 50
    assert 0.0 <= payload["frequency"] <= 1.0


def test_generate_writes_outputs(setup, tmp_path, capsys):
    _, corpus, wall_file, pop_file = setup
    out_path = tmp_path / "gen.crux"
    code, out, _ = run_cli(capsys, [
        "generate", "--wall", str(wall_file), "--target-grade", "5.10a",
        "--iterations", "20", "--seed", "1", "--corpus", str(corpus),
        "--hold-budget", "6", "--in-loop-population", "40",
        "--population", str(pop_file), "--out", str(out_path)])
    assert code == 0
    assert out_path.exists()
    report = json.loads(out_path.with_suffix(".report.json").read_text())
    assert report["iterations"] == 20
    from crux.format import parse_document
    res = parse_document(out_path.read_text())
    assert res.ok and res.routes[0].name == "generated"


def test_cli_entrypoint_subprocess(setup):
    _, _, wall_file, _ = setup
    proc = subprocess.run([sys.executable, "-m", "crux.cli", "parse", str(wall_file)],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout == wall_file.read_text()


def test_serve_corpus_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("CRUX_CORPUS", str(tmp_path / "envcorpus"))
    parser = cli.build_parser()
    args = parser.parse_args(["serve"])
    assert args.corpus == str(tmp_path / "envcorpus")
    monkeypatch.delenv("CRUX_CORPUS")
    args = cli.build_parser().parse_args(["serve"])
    assert args.corpus == "corpus"


def test_beta_byte_identical_across_processes(setup):
    _, _, wall_file, _ = setup
    outs = []
    for _ in range(2):
        proc = subprocess.run([sys.executable, "-m", "crux.cli", "beta", str(wall_file), "--json"],
                              capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
