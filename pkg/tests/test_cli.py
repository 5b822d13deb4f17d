import json

from supobf.cli import main
from conftest import FIXTURES


def fixture(name: str) -> str:
    return str(FIXTURES / f"{name}.prob")


def test_validate_ok(capsys):
    assert main(["validate", fixture("example1")]) == 0
    out = capsys.readouterr().out
    assert "ok:" in out


def test_validate_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.prob"
    bad.write_text("[alphabet]\na\n[plant]\nstates: q0\n")
    assert main(["validate", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_check_exit_codes(capsys):
    assert main(["check", fixture("atk")]) == 1
    assert main(["check", fixture("tri")]) == 0
    assert main(["check", fixture("example1")]) == 1
    assert main(["check", fixture("example1_obfuscated")]) == 0


def test_check_witness_output(capsys):
    assert main(["check", fixture("example1"), "--witness"]) == 1
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "attackable"
    assert lines[1] == "(ε, {b,c,d})"
    assert lines[2] == "(c, {a,b,d})"
    assert lines[3] == "(ε, {b})"
    assert lines[4] == "ATTACK a'"


def test_closed_loop_emission(capsys, tmp_path):
    dot = tmp_path / "loop.dot"
    assert main(["closed-loop", fixture("tri"), "--dot", str(dot)]) == 0
    out = capsys.readouterr().out
    assert "[closed-loop]" in out and "(q0,x0) a (q1,x1)" in out
    assert dot.read_text().startswith("digraph")


def test_synth_bp_lists_candidates(capsys, tmp_path):
    dimacs = tmp_path / "inst.cnf"
    assert main(["synth-bp", fixture("tri"), "-n", "2",
                 "--dimacs", str(dimacs)]) == 0
    out = capsys.readouterr().out
    assert "behavior-preserving supervisor(s) of size 2" in out
    assert out.count("[supervisor]") == 2
    text = dimacs.read_text()
    assert text.splitlines()[0].startswith("c t 0 a 0 = ")
    assert "p cnf" in text


def test_oracle_exit_codes(capsys):
    assert main(["oracle", fixture("atk")]) == 1
    out = capsys.readouterr().out
    assert "attackable" in out and "ATTACK k" in out
    assert main(["oracle", fixture("tri"), "--bound", "4"]) == 0


def test_obfuscate_found_pipeline(tmp_path, capsys):
    out_file = tmp_path / "obf.prob"
    json_file = tmp_path / "run.json"
    code = main(["obfuscate", fixture("example1"), "--out", str(out_file),
                 "--json", str(json_file)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "found: 1-state" in stdout

    # the emitted problem file must validate, verify as non-attackable and
    # keep the original closed-loop behavior
    assert main(["validate", str(out_file)]) == 0
    capsys.readouterr()
    assert main(["check", str(out_file)]) == 0
    import supobf as S
    original = S.load_problem(fixture("example1"))
    hardened = S.load_problem(str(out_file))
    eq, _ = S.language_equal(
        S.closed_loop(original.plant, original.supervisor),
        S.closed_loop(hardened.plant, hardened.supervisor))
    assert eq

    summary = json.loads(json_file.read_text())
    assert summary["found"] is True and summary["size"] == 1
    assert summary["trace"][0]["n"] == 1


def test_obfuscate_not_found_exit(capsys):
    assert main(["obfuscate", fixture("atk"), "--nmax", "2"]) == 1
    assert "not found" in capsys.readouterr().out


def test_obfuscate_json_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["obfuscate", fixture("perf"), "--json", str(a)]) == 0
    assert main(["obfuscate", fixture("perf"), "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_unknown_file_is_input_error(capsys):
    assert main(["check", "no-such-file.prob"]) == 2
    assert "error:" in capsys.readouterr().err


def test_repair_selfloops_flag(tmp_path):
    text = (FIXTURES / "tri.prob").read_text()
    # drop b from the observable set so it needs self-loops at x0 too
    text = text.replace("[observable]\na b", "[observable]\na") \
               .replace("[controllable]\nb", "[controllable]\n") \
               .replace("x1 b x0", "")
    broken = tmp_path / "broken.prob"
    broken.write_text(text)
    assert main(["validate", str(broken)]) == 2
    assert main(["--repair-selfloops", "validate", str(broken)]) == 0
