import io
import json

import pytest

from hybridlab.cli import main


def _run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_reach_on_figure(data_dir):
    code, text = _run("analyze", "--reach", str(data_dir / "figure.ir"))
    assert code == 0
    assert "main:bb 3" in text.splitlines()


def test_trim_on_loop(data_dir):
    code, text = _run("analyze", "--trim", str(data_dir / "loop.ir"))
    assert code == 0
    assert text.startswith("trimmed 2/2")



def test_gen_and_replay_ground_truth(tmp_path):
    assert _run("gen", "--seed", "4", "--out", str(tmp_path))[0] == 0
    row = (tmp_path / "manifest.csv").read_text().splitlines()[1].split(",")
    bug_id, hexin = row[0], row[3]
    code, text = _run("replay", str(tmp_path / "prog.ir"), hexin, "--hex")
    assert code == 0
    assert any(l.startswith(f"violation {bug_id} ") for l in text.splitlines())
    assert text.splitlines()[-1].startswith("status ")


def test_deterministic_runs_identical(tmp_path):
    _run("gen", "--seed", "5", "--out", str(tmp_path / "g"))
    outs = []
    for k in range(2):
        d = tmp_path / f"r{k}"
        code, _ = _run("run", str(tmp_path / "g" / "prog.ir"), "--deterministic", "--rng", "9", "--rounds", "4",
                       "--fuzz-execs", "200", "--manifest", str(tmp_path / "g" / "manifest.csv"), "--out", str(d))
        assert code == 0
        outs.append((d / "stats.jsonl").read_text())
    assert outs[0] == outs[1]
    rows = [json.loads(l) for l in outs[0].splitlines()]
    assert [r["round"] for r in rows] == [1, 2, 3, 4]
    assert set(rows[0]) >= {"round", "edges", "pairs", "labels_reached", "labels_triggered",
                            "planted_triggered", "policy", "selected"}
    assert (tmp_path / "r0" / "bugs.csv").read_text().startswith("label_id,family,first_round,witness_file")


def test_plotdata(tmp_path):
    _run("gen", "--seed", "5", "--out", str(tmp_path / "g"))
    _run("run", str(tmp_path / "g" / "prog.ir"), "--deterministic", "--rng", "1", "--rounds", "2",
         "--fuzz-execs", "50", "--out", str(tmp_path / "r"))
    code, text = _run("plotdata", str(tmp_path / "r" / "stats.jsonl"))
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "policy,run,round,labels_triggered,planted_triggered"
    assert len(lines) == 3 and lines[1].startswith("savior,r,")


def test_config_file(tmp_path, data_dir):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# campaign\npolicy = random\nrounds = 2\nfuzz_execs = 30\n")
    code, text = _run("run", str(data_dir / "figure.ir"), "--config", str(cfg), "--rng", "0")
    assert code == 0
    rows = [json.loads(l) for l in text.splitlines()]
    assert len(rows) == 2 and rows[0]["policy"] == "random"


@pytest.mark.parametrize("argv, code", [
    ([], 1),
    (["frobnicate"], 1),
    (["analyze"], 1),
    (["analyze", "/nonexistent/x.ir"], 1),
    (["run", "x.ir", "--policy", "bogus"], 1),
])
def test_usage_errors(argv, code):
    assert _run(*argv)[0] == code


def test_component_errors(tmp_path, data_dir):
    bad = tmp_path / "bad.ir"
    bad.write_text("func main(entry=b0) {\nb0:\n  v1 = add.u8 v9, 1\n  ret\n}\n")
    assert _run("analyze", str(bad))[0] == 2
    cfg = tmp_path / "c.txt"
    cfg.write_text("k = 0\n")
    assert _run("run", str(data_dir / "figure.ir"), "--config", str(cfg), "--rng", "0")[0] == 2
