import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from histq.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

SMALL = """\
spec: {single_dim: 2, times: [1, 2]}
state: {matrix: [[0.5, 0.5], [0.5, 0.5]]}
propagator: hadamard_chain
partitions:
  z_z: [["span{0}", "span{1}"], ["span{0}", "span{1}"]]
tasks:
  - {kind: ils_verify, name: cross, seed: 3, samples: 20}
  - {kind: consistency, name: zz, partition: z_z}
  - {kind: decompose, name: dec, seed: 1}
  - {kind: norm_sweep, name: sweep, family: maximally_mixed, n: 1, dims: "2..5", seed: 2}
"""


def write(tmp_path, text, name="sc.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_run_ok(tmp_path, capsys):
    sc = write(tmp_path, SMALL)
    assert main(["run", str(sc)]) == 0
    out = tmp_path / "sc.out"
    assert sorted(p.name for p in out.iterdir()) == ["cross.json", "dec.json", "sweep.csv", "sweep.json", "zz.json"]
    report = json.loads((out / "cross.json").read_text())
    assert report["passed"] and report["kind"] == "ils_verify"
    assert "cross: pass" in capsys.readouterr().err


def test_run_bad_state(tmp_path, capsys):
    sc = write(tmp_path, SMALL.replace("[[0.5, 0.5], [0.5, 0.5]]", "[[0.6, 0.0], [0.0, 0.6]]"))
    assert main(["run", str(sc), "--out", str(tmp_path / "o")]) == 1
    assert "state" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_run_missing_key_and_duplicates(tmp_path):
    assert main(["run", str(write(tmp_path, "state: pure0\ntasks: []\n"))]) == 1
    dup = "spec: {single_dim: 2, times: [1]}\nspec: {single_dim: 2, times: [1]}\nstate: pure0\n"
    assert main(["run", str(write(tmp_path, dup, "dup.yaml"))]) == 1


def test_run_verification_failure(tmp_path):
    text = SMALL.replace("partition: z_z}", "partition: z_z, expect_consistent: false}")
    assert main(["run", str(write(tmp_path, text)), "--out", str(tmp_path / "o")]) == 2
    report = json.loads((tmp_path / "o" / "zz.json").read_text())
    assert report["passed"] is False


def test_run_empty_tasks(tmp_path):
    text = "spec: {single_dim: 2, times: [1]}\nstate: pure0\npropagator: identity\ntasks: []\n"
    assert main(["run", str(write(tmp_path, text)), "--out", str(tmp_path / "o")]) == 0
    assert not (tmp_path / "o").exists() or not any((tmp_path / "o").iterdir())


def test_run_determinism_and_parallel(tmp_path):
    sc = write(tmp_path, SMALL)
    for out, extra in (("a", []), ("b", []), ("c", ["--parallel"])):
        assert main(["run", str(sc), "--out", str(tmp_path / out)] + extra) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
        assert f.read_bytes() == (tmp_path / "c" / f.name).read_bytes()


def test_sweep_csv(tmp_path, capsys):
    assert main(["sweep", "--family", "pure", "--n", "1", "--dims", "2..8"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "d,n,trace_norm,operator_norm,tracial_sup"
    assert len(lines) == 8
    assert lines[1].startswith("2,1,2,1,")
    out = tmp_path / "s.csv"
    assert main(["sweep", "--dims", "2..8", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert main(["sweep", "--dims", "2..8", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_sweep_divergence(capsys):
    assert main(["sweep", "--probe", "divergence", "--weights", "0.5,0.3,0.2", "--dims", "4..6"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == ["d,re_partial_sum,im_partial_sum", "4,1,0", "5,1.25,0", "6,1.5,0"]


def test_sweep_errors(capsys):
    assert main(["sweep", "--n", "2", "--dims", "2..100"]) == 1
    assert "4096" in capsys.readouterr().err
    assert main(["sweep", "--dims", "abc"]) == 64
    assert main(["sweep", "--family", "thermal"]) == 64
    assert main(["sweep", "--probe", "divergence", "--i1", "9", "--dims", "4..5"]) == 1


def test_usage_errors():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 64
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 64


def test_report(tmp_path, capsys):
    sc = write(tmp_path, SMALL)
    assert main(["run", str(sc)]) == 0
    capsys.readouterr()
    assert main(["report", "--scenario", str(sc), "--task", "zz"]) == 0
    text = capsys.readouterr().out
    assert "consistent: true" in text and "(1,1)" in text
    assert main(["report", "--scenario", str(sc), "--task", "dec"]) == 0
    text = capsys.readouterr().out
    assert "positive members:" in text and "negative members:" in text
    assert main(["report", "--scenario", str(sc), "--task", "cross", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data == json.loads((tmp_path / "sc.out" / "cross.json").read_text())
    assert main(["report", "--scenario", str(sc), "--task", "nope"]) == 1


def test_bundled_scenarios(tmp_path):
    for name in ("qubit_two_time.yaml", "classical_qubit.yaml"):
        src = tmp_path / name
        shutil.copy(SCENARIOS / name, src)
        assert main(["run", str(src)]) == 0


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "histq.cli", "sweep", "--dims", "2..3"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0].startswith("d,n,")
