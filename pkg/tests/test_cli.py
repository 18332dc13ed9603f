import json
import subprocess
import sys

import pytest

from cfhm.cli import main


def _write_instance(path, hg, cf="", meta=None):
    path.mkdir(parents=True, exist_ok=True)
    (path / "instance.hg").write_text(hg)
    (path / "conflicts.cf").write_text(cf)
    (path / "meta.json").write_text(json.dumps(meta or {"d": 1.0}))
    return path


@pytest.fixture
def covering_dir(tmp_path):
    g = tmp_path / "g.hg"
    # a 6-cycle of pairs plus two chords
    g.write_text("hg 6 0 0 2 0 0\n" + "".join(f"e1 {i} {(i + 1) % 6}\n" for i in range(6)) + "e1 0 3\ne1 1 4\n")
    c = tmp_path / "g.cf"
    c.write_text("c 0 2 4\n")
    out = tmp_path / "inst"
    assert main(["build", "covering", "--input", str(g), "--conflicts", str(c), "--out", str(out)]) == 0
    return out


def test_build_writes_three_files(covering_dir):
    assert sorted(p.name for p in covering_dir.iterdir()) == ["conflicts.cf", "instance.hg", "meta.json"]
    assert (covering_dir / "conflicts.cf").read_text().splitlines()[0] == "oracle covering"
    meta = json.loads((covering_dir / "meta.json").read_text())
    assert meta["app"] == "covering" and meta["d"] == 3


def test_validate_reports_json(covering_dir, tmp_path, capsys):
    code = main(["validate", str(covering_dir), "--eps", "0.2"])
    out = json.loads(capsys.readouterr().out)
    assert set(out) >= {"H", "C", "E", "implicit"}
    assert code == (0 if all(out[k]["holds"] for k in ("H", "C", "E")) else 1)


def test_match_decode_verify(covering_dir, tmp_path, capsys):
    mdir = tmp_path / "m"
    assert main(["match", str(covering_dir), "--seed", "3", "--out", str(mdir)]) == 0
    assert sorted(p.name for p in mdir.iterdir()) == ["log.json", "matching.json", "stats.json"]
    capsys.readouterr()
    assert main(["decode", str(covering_dir), str(mdir / "matching.json")]) == 0
    decoded = json.loads(capsys.readouterr().out)
    assert decoded["app"] == "covering" and decoded["edges"]
    assert main(["verify", str(covering_dir), str(mdir / "matching.json"), "--out", str(tmp_path / "v.json")]) == 0
    report = json.loads((tmp_path / "v.json").read_text())
    assert all(c["pass"] for c in report["covering"]["checks"])


def test_match_is_byte_identical(covering_dir, tmp_path):
    for name in ("a", "b"):
        assert main(["match", str(covering_dir), "--seed", "9", "--out", str(tmp_path / name)]) == 0
    for f in ("matching.json", "stats.json", "log.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_ensemble(covering_dir, capsys):
    assert main(["match", str(covering_dir), "--seeds", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [json.loads(x)["seed"] for x in lines] == [0, 1, 2]
    assert all((covering_dir / f"match-{s}" / "matching.json").exists() for s in range(3))


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == 2
    assert main(["build", "ramsey-cycles"]) == 2
    assert main(["build", "nonsense"]) == 2
    assert "usage error" in capsys.readouterr().err


def test_input_errors_exit_2(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "missing")]) == 2
    bad = _write_instance(tmp_path / "bad", "hg 2 0 0 2 0 0\ne1 0 x\n")
    assert main(["match", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err
    wrong = _write_instance(tmp_path / "wrong", "hg 2 0 0 2 0 0\ne1 0 1\n", "c 0 7\n")
    assert main(["match", str(wrong)]) == 2


def test_cap_exits_3(tmp_path):
    # two anchors whose only H2 edges meet in R
    inst = _write_instance(tmp_path / "cap", "hg 2 0 1 1 0 1\ne2 0 2\ne2 1 2\n")
    assert main(["match", str(inst), "--max-rounds", "5", "--out", str(tmp_path / "m")]) == 3
    log = json.loads((tmp_path / "m" / "log.json").read_text())
    assert log["outcome"] == "cap-reached" and len(log["rounds"]) == 5
    assert main(["verify", str(inst), str(tmp_path / "m" / "matching.json")]) == 1


def test_no_safe_edge_exits_4(tmp_path):
    inst = _write_instance(tmp_path / "unsat", "hg 3 0 1 2 0 1\ne1 1 2\ne2 0 3\n", "d 0 1\n")
    assert main(["match", str(inst), "--out", str(tmp_path / "m")]) == 4
    assert json.loads((tmp_path / "m" / "log.json").read_text())["vertex"] == 0


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "cfhm.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "validate" in out.stdout
