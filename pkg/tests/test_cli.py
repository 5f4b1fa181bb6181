import csv
import json

import numpy as np
import pytest

from lrqfp.bench import CSV_HEADER
from lrqfp.cli import main
from lrqfp.model import read_instance


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["generate", "--n", "5", "--rank", "2", "--t", "3", "--seed", "4", "--ub", "0.4",
                 "--out", str(path)]) == 0
    return path


def test_generate_writes_valid_instance(instance_file):
    inst = read_instance(instance_file.read_bytes())
    assert inst.n == 5 and np.linalg.matrix_rank(inst.Q) == 2


def test_generate_full_rank_family(tmp_path):
    path = tmp_path / "tn.json"
    assert main(["generate", "--n", "4", "--rank", "4", "--t", "2", "--family", "full-rank-tn",
                 "--ub", "0.5", "--out", str(path)]) == 0
    assert read_instance(path.read_bytes()).decomp.shape == (4, 4)


@pytest.mark.parametrize("algo", ["ibaraki", "region", "fast-region", "auto"])
def test_solve_output_shape(instance_file, tmp_path, algo):
    out = tmp_path / "sol.json"
    assert main(["solve", "--algo", algo, "--eps", "1e-3", "--out", str(out), str(instance_file)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"x", "f", "status", "regions", "trace"}
    assert len(doc["x"]) == 5 and doc["f"] > 0


def test_solve_ldl_and_stdout(instance_file, capsys):
    assert main(["solve", "--decomp", "ldl", "--algo", "fast-region", str(instance_file)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "stationary_only"


def test_solve_rank_one_rejects_higher_rank(instance_file, capsys):
    assert main(["solve", "--algo", "rank-one", str(instance_file)]) == 2
    assert "rank-one" in capsys.readouterr().err


def test_malformed_instance(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "Q": [1, 0, 0, 1]}')
    assert main(["solve", str(bad)]) == 2
    assert "missing" in capsys.readouterr().err


def test_verify(instance_file, capsys):
    assert main(["verify", "--oracle-samples", "20000", str(instance_file)]) == 0
    out = capsys.readouterr().out
    assert "oracle" in out and "region" in out


def test_bench_csv(tmp_path, monkeypatch):
    import lrqfp.bench as bench

    monkeypatch.setattr(bench, "_cells", lambda table, scale: [(10, 2, 5, "standard")])
    out = tmp_path / "t4.csv"
    assert main(["bench", "--table", "t4", "--trials", "2", "--scale", "desk", "--seed", "1",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(list(csv.DictReader(lines))) == 2
