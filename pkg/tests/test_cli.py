from __future__ import annotations

import json
import subprocess
import sys

import pytest

from actorcps.cli import main

from conftest import EXAMPLES

MAPREDUCE = str(EXAMPLES / "mapreduce.act")
DEADLOCK = str(EXAMPLES / "deadlock.act")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_mapreduce_is_sound(capsys):
    code, out, _ = run(capsys, "check", MAPREDUCE)
    lines = out.splitlines()
    assert code == 0
    assert lines[-1].startswith("SOUND ") and lines[-1].endswith(" steps")
    assert int(lines[-1].split()[1]) == len(lines) - 1


def test_run_exit_codes(capsys, tmp_path):
    assert run(capsys, "run", MAPREDUCE)[0] == 0
    assert run(capsys, "run", MAPREDUCE, "--sem", "rt")[0] == 0
    assert run(capsys, "run", DEADLOCK, "--sem", "rt")[0] == 3
    assert run(capsys, "run", DEADLOCK)[0] == 3
    assert run(capsys, "run", MAPREDUCE, "--fuel", "3")[0] == 4
    bad = tmp_path / "bad.act"
    bad.write_text("main() { x := ; }")
    assert run(capsys, "run", str(bad))[0] == 2
    assert run(capsys, "run", str(tmp_path / "missing.act"))[0] == 2
    assert run(capsys, "run", MAPREDUCE, "--scheduler", "nope")[0] == 2


def test_run_reports_main_attributes(capsys):
    code, out, _ = run(capsys, "run", MAPREDUCE, "--sem", "rt")
    assert "status Finished" in out and "r=42" in out


def test_runtime_error_exit_code(capsys, tmp_path):
    f = tmp_path / "dangling.act"
    f.write_text("main() { x := f.get; }")
    code, _, err = run(capsys, "run", str(f), "--sem", "rt")
    assert code == 1 and "DanglingRef" in err


def test_jsonl_schema(capsys, tmp_path):
    out = tmp_path / "t.jsonl"
    assert run(capsys, "run", MAPREDUCE, "--sem", "rt", "--trace", str(out))[0] == 0
    recs = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert [r["i"] for r in recs] == list(range(len(recs)))
    for r in recs:
        assert set(r) == {"i", "obj", "rule", "stmt", "spawn"}
        assert (r["spawn"] is not None) == (r["rule"] == "Async")
        if r["spawn"]:
            assert set(r["spawn"]) == {"callee", "method", "destiny", "args"}


@pytest.mark.parametrize("sem,extra", [("rt", []), ("source", ["--seed", "7"]), ("source", ["--scheduler", "rr"])])
def test_traces_are_byte_identical(capsys, tmp_path, sem, extra):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run(capsys, "run", MAPREDUCE, "--sem", sem, *extra, "--trace", str(a))
    run(capsys, "run", MAPREDUCE, "--sem", sem, *extra, "--trace", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_script_scheduler_replays_a_trace(capsys, tmp_path):
    rt, replay = tmp_path / "rt.jsonl", tmp_path / "src.jsonl"
    run(capsys, "run", MAPREDUCE, "--sem", "rt", "--trace", str(rt))
    assert run(capsys, "run", MAPREDUCE, "--scheduler", f"script:{rt}", "--trace", str(replay))[0] == 0
    assert rt.read_bytes() == replay.read_bytes()


def test_check_replay_detects_tampering(capsys, tmp_path):
    t = tmp_path / "t.jsonl"
    run(capsys, "run", MAPREDUCE, "--sem", "rt", "--trace", str(t))
    assert run(capsys, "check", MAPREDUCE, "--replay", str(t), "--quiet")[0] == 0
    lines = t.read_text().splitlines()
    lines[2], lines[3] = lines[3], lines[2]
    t.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "check", MAPREDUCE, "--replay", str(t), "--quiet")
    assert code == 1 and out.splitlines()[-1].startswith("UNSOUND")


def test_compile_dump_is_stable(capsys):
    _, a, _ = run(capsys, "compile", MAPREDUCE, "--dump")
    _, b, _ = run(capsys, "compile", MAPREDUCE, "--dump")
    assert a == b and a.startswith("(layout ")
    assert "(method main 0" in a


def test_cost_verb(capsys, tmp_path):
    code, out, _ = run(capsys, "cost", MAPREDUCE, "--model", "memory", "--per-object")
    assert code == 0
    assert out.splitlines() == ["model memory total 2", "object 0 2", "object 2 0", "object 3 0", "preserved yes"]
    f = tmp_path / "m.txt"
    f.write_text("calls\nAsync=1\nSync=1\n")
    code, out, _ = run(capsys, "cost", MAPREDUCE, "--model-file", str(f))
    assert code == 0 and out.splitlines()[0] == "model calls total 3"
    assert run(capsys, "cost", MAPREDUCE, "--model", "nope")[0] == 2


def test_bench_verb(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "logs", "--sweep", "2,4")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "family,n,steps,wall_nanos" and len(rows) == 3
    csv_path = tmp_path / "o.csv"
    assert run(capsys, "bench", "logs", "--n", "3", "--csv", str(csv_path))[0] == 0
    assert csv_path.read_text().splitlines()[1].startswith("logs,3,")
    code, out, _ = run(capsys, "bench", "mapreduce", "--n", "2", "--source")
    assert code == 0 and "reduce(r1, r2)" in out
    assert run(capsys, "bench", "nope")[0] == 2
    assert run(capsys, "bench", "logs", "--n", "0")[0] == 2


def test_bounds_verb(capsys, tmp_path):
    b = tmp_path / "b.csv"
    b.write_text("program,n,object,bound\nmapreduce,0,0,20\nmapreduce,0,2,1\n")
    code, out, _ = run(capsys, "bounds", MAPREDUCE, "--bounds", str(b))
    assert code == 1
    assert out.splitlines()[0].startswith("WITHIN") and out.splitlines()[1].startswith("EXCEEDS")
    b.write_text("program,n,object,bound\nlogs,4,0,1000\n")
    assert run(capsys, "bounds", "logs", "--bounds", str(b))[0] == 0
    b.write_text("program,n,object,bound\nother,4,0,1\n")
    assert run(capsys, "bounds", "logs", "--bounds", str(b))[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "actorcps", "check", MAPREDUCE, "--quiet"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("SOUND")
