import json

import numpy as np
import pytest

from ckabs import io
from ckabs.cli import run
from ckabs.dynamics import make_lorentz_system
from ckabs.symbolic import Partition, word

from conftest import ROTATION_M1, ROTATION_M2


@pytest.fixture
def chain_files(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.write_json(a, io.chain_to_dict(ROTATION_M1))
    io.write_json(b, io.chain_to_dict(ROTATION_M2))
    return a, b


def values(out):
    return dict(line.split(" ", 1) for line in out.strip().splitlines())


def test_ck_of_a_chain_with_itself(chain_files, capsys):
    a, _ = chain_files
    assert run(["ck", "--chain1", str(a), "--chain2", str(a), "--epsilon", "1e-3"]) == 0
    out = values(capsys.readouterr().out)
    assert float(out["value"]) == 0.0
    assert int(out["k_used"]) == 11


def test_ck_with_oracle(chain_files, capsys):
    a, b = chain_files
    assert run(["ck", "--chain1", str(a), "--chain2", str(b), "--oracle-k", "3"]) == 0
    assert float(values(capsys.readouterr().out)["value"]) == pytest.approx(0.125)


def test_simulate(capsys, tmp_path):
    assert run(["simulate", "--system", "rotation:0.25", "--future", "3", "--seed", "4"]) == 0
    assert len(capsys.readouterr().out.split()) == 4
    out = tmp_path / "paths.csv"
    assert run(["simulate", "--system", "lorentz", "--count", "50", "--past", "1",
                "--future", "2", "--out", str(out)]) == 0
    assert out.read_text().startswith("# config")
    header, rows = io.read_csv(out)
    assert header == ["t-1", "t0", "t1", "t2"] and len(rows) == 50


def test_abstract_then_verify(tmp_path, capsys):
    part = tmp_path / "part.json"
    io.write_json(part, io.partition_to_dict(Partition.letters(3)))
    chain = tmp_path / "chain.json"
    assert run(["abstract", "--system", "lorentz", "--partition", str(part),
                "--samples", "5000", "--out", str(chain)]) == 0
    data = io.read_json(chain)
    assert "config" in data and len(data["mu"]) == 3
    csv_out = tmp_path / "ph.csv"
    assert run(["verify", "--chain", str(chain), "--hmax", "3", "--out", str(csv_out)]) == 0
    header, rows = io.read_csv(csv_out)
    assert header == ["H", "P_H_estimate"] and len(rows) == 4
    assert float(rows[0][1]) == pytest.approx(0.9, abs=0.02)


def test_refine_outputs(tmp_path, capsys):
    out, rep, ch = tmp_path / "part.json", tmp_path / "rep.json", tmp_path / "chain.json"
    assert run(["refine", "--system", "lorentz", "--iters", "2", "--samples", "3000",
                "--epsilon", "1e-2", "--out", str(out), "--report", str(rep),
                "--chain-out", str(ch)]) == 0
    part, dropped = io.partition_from_dict(io.read_json(out))
    report = io.read_json(rep)
    assert report["n_states"] == len(part) == 7 - len(dropped)
    assert len(report["iterations"]) == 2
    assert io.chain_from_dict(io.read_json(ch)).n_states == len(part)


def test_ground_truth_and_grid(tmp_path, capsys):
    assert run(["verify", "--ground-truth", "--system", "lorentz", "--samples", "20000",
                "--hmax", "1"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("0,") and float(first.split(",")[1]) == pytest.approx(0.9, abs=0.02)
    grid = tmp_path / "grid.json"
    assert run(["grid", "--system", "lorentz", "--parts", "2", "--samples", "20000",
                "--out", str(grid)]) == 0
    assert len(io.read_json(grid)["mu"]) == 16


def test_figures_complexity_only(tmp_path):
    assert run(["figures", "--outdir", str(tmp_path), "--kmax", "4", "--skip-safety"]) == 0
    header, rows = io.read_csv(tmp_path / "complexity.csv")
    assert header[:3] == ["alphabet_size", "k", "nodes_visited"]
    assert all(int(r[2]) <= int(r[3]) for r in rows)


def test_exit_codes(tmp_path, capsys):
    assert run([]) == 2
    assert run(["ck", "--chain1", "x.json"]) == 2
    assert run(["ck", "--chain1", str(tmp_path / "nope.json"), "--chain2", "x"]) == 1
    bad = tmp_path / "bad.json"
    io.write_json(bad, {"alphabet_size": 2, "mu": [0.5, 0.4], "tau": [[1, 0], [0, 1]], "labels": [0, 1]})
    assert run(["verify", "--chain", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err
    assert run(["refine", "--system", "lorentz", "--iters", "1", "--metric", "tv",
                "--out", str(tmp_path / "o.json")]) == 1


def test_chain_round_trip():
    chain = io.chain_from_dict(json.loads(json.dumps(io.chain_to_dict(ROTATION_M2))))
    assert chain == ROTATION_M2


def test_partition_round_trip():
    part = Partition.from_strings(["00", "01@[0,1]", "11@[-1,0]"], 2)
    back, dropped = io.partition_from_dict(io.partition_to_dict(part, [word("10")]))
    assert back == part and dropped == (word("10"),)
    plain, _ = io.partition_from_dict(["0", "1"])
    assert plain == Partition.letters(2)


def test_system_round_trip(tmp_path):
    system = make_lorentz_system()
    path = tmp_path / "sys.json"
    io.write_json(path, io.system_to_dict(system))
    again = io.load_system(str(path))
    x = system.sample_initial(np.random.default_rng(0), 500)
    np.testing.assert_allclose(again.step(x), system.step(x))
    np.testing.assert_array_equal(again.output(x), system.output(x))
