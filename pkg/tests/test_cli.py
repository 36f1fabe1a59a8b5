import json
import shutil
import subprocess
import sys

import pytest

from blocklogic.cli import main

from conftest import CORPUS, read


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_trace_matches_final_state(capsys):
    code, out, _ = run(capsys, "run", CORPUS / "appendix_a.bcss", "--trace")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "Final | " + read("states/appendix_a_final.st").strip()
    assert sum("guard" in line for line in lines) == 3


def test_run_with_initial_state(tmp_path, capsys):
    prog = tmp_path / "p.bcss"
    prog.write_text("y := x + 1")
    st = tmp_path / "s.st"
    st.write_text("sV: x=4")
    code, out, _ = run(capsys, "run", prog, "--state", st)
    assert code == 0 and "y=5" in out


@pytest.mark.parametrize("name", ["deref_bad", "unknown_block", "index_out_of_range",
                                  "content_not_in_heap", "unbound", "sort_error"])
def test_faults_exit_one(name, capsys):
    code, out, _ = run(capsys, "run", CORPUS / "faults" / f"{name}.bcss")
    assert code == 1
    assert out.startswith("Fault(")


def test_divergence_exits_two(capsys):
    code, out, _ = run(capsys, "run", CORPUS / "faults" / "diverge.bcss", "--fuel", "25")
    assert code == 2 and out.strip() == "OutOfFuel"


def test_parse_error_exits_64(tmp_path, capsys):
    bad = tmp_path / "bad.bcss"
    bad.write_text("x := := 1")
    code, _, err = run(capsys, "run", bad)
    assert code == 64 and "error" in err


def test_missing_file_and_bad_flags_exit_64(capsys):
    assert run(capsys, "run", "/nonexistent.bcss")[0] == 64
    with pytest.raises(SystemExit) as exc:
        main(["run", "x", "--fuel", "-3"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["assert", "a", "b", "--value-range", "5:1"])
    assert exc.value.code == 64


def test_unknown_suite_exits_64(capsys):
    assert run(capsys, "fuzz", "nonsense", "--trials", "5")[0] == 64
    assert run(capsys, "fuzz", "axiom:A99", "--trials", "5")[0] == 64


def test_assert_true_and_false(capsys):
    final = CORPUS / "states" / "appendix_a_final.st"
    code, out, _ = run(capsys, "assert", final, CORPUS / "assertions" / "copy_block_framed.bas")
    assert code == 0 and out.startswith("true") and "caveat" in out
    code, out, _ = run(capsys, "assert", final, CORPUS / "assertions" / "copy_block.bas")
    assert code == 1 and out.startswith("false")
    code, out, _ = run(capsys, "assert", CORPUS / "states" / "empty.st", CORPUS / "assertions" / "emp.bas")
    assert (code, out.strip()) == (0, "true")


def test_verify_rejects_a_mutation_with_its_step(capsys):
    manifest = json.loads(read("mutations/manifest.json"))
    entry = next(m for m in manifest if m["file"].startswith("m06"))
    code, out, _ = run(capsys, "verify", CORPUS / "mutations" / entry["file"], "--trials", "40")
    assert code == 1
    assert f"first failing step: {entry['failing_step']}" in out


def test_fuzz_is_deterministic_and_quiet(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(capsys, "fuzz", "axiom:BCL", "--trials", "30", "--seed", "9", "--out", a)[0] == 0
    code, out, _ = run(capsys, "fuzz", "axiom:A14", "--trials", "30", "--seed", "9", "--out", b, "--quiet")
    assert code == 0 and out == ""
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().rstrip().splitlines()[-1].startswith("PASS")


def test_installed_entry_point():
    exe = shutil.which("blocklogic")
    cmd = [exe] if exe else [sys.executable, "-m", "blocklogic"]
    res = subprocess.run(cmd + ["run", str(CORPUS / "skip.bcss")], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("Final")
