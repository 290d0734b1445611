import subprocess
import sys

from cycid.cli import main
from cycid.library import corpus_path


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def C(name):
    return str(corpus_path(name))


def test_check_proof(capsys):
    code, out, _ = run(capsys, "check", "--require-progress", C("m_sub_n.proof"))
    assert code == 0
    assert out.splitlines()[-1] == "result\tproof\tcyclic"


def test_check_preproof(capsys):
    code, out, _ = run(capsys, "check", C("e1_loop.proof"))
    assert code == 0 and "Violation" in out
    code, _, _ = run(capsys, "check", "--require-progress", C("e1_loop.proof"))
    assert code == 1


def test_check_reports_node_and_rule(tmp_path, capsys):
    bad = tmp_path / "bad.proof"
    bad.write_text(corpus_path("e1_loop.proof").read_text().replace("node n4: id", "node n4: eqR"))
    code, out, _ = run(capsys, "check", str(bad))
    assert code == 1
    assert out.splitlines()[0].startswith("error\tn4\teqR\t")


def test_check_open_leaves(tmp_path, capsys):
    from cycid.grammar import parse_formula
    from cycid.proofs import serialize_proof
    from cycid.translate import functoriality_finite
    f = tmp_path / "open.proof"
    f.write_text(serialize_proof(functoriality_finite(parse_formula("or(Y(x), =(x,0))"), "Y", "Z")))
    assert run(capsys, "check", str(f))[0] == 1
    assert run(capsys, "check", "--allow-open", str(f))[0] == 0


def test_translate(tmp_path, capsys):
    out_file = tmp_path / "out.proof"
    code, out, _ = run(capsys, "translate", C("even_nat.proof"), "-o", str(out_file))
    assert code == 0 and "progressing" in out
    assert run(capsys, "check", "--require-progress", str(out_file))[0] == 0
    assert run(capsys, "translate", C("m_sub_n.proof"))[0] == 2


def test_eval(capsys):
    assert run(capsys, "eval", "--bound", "10", "--formula", "E(4)")[1] == "true\texact\n"
    assert run(capsys, "eval", "--bound", "10", "--formula", "O(x)", "--assign", "x=4")[1] == "false\texact\n"
    code, out, _ = run(capsys, "eval", "--bound", "10", "--formula", "ex y. =(y,11)", "--strict-exact")
    assert (code, out) == (3, "false\tbound-limited\n")


def test_eval_errors(capsys):
    assert run(capsys, "eval", "--bound", "10", "--formula", "E(4")[0] == 2
    code, _, err = run(capsys, "eval", "--bound", "10", "--formula", "E(x)")
    assert code == 2 and "--assign" in err
    assert run(capsys, "eval", "--bound", "-1", "--formula", "E(0)")[0] == 2
    assert run(capsys, "eval", "--formula", "E(0)")[0] == 2


def test_profile(capsys):
    code, out, _ = run(capsys, "profile", "--bound", "10", "--pred", "e")
    lines = out.splitlines()
    assert code == 0
    assert lines[:3] == ["stage\tentered", "1\t0", "2\t2"]
    assert lines[-1] == "fixpoint\t0,2,4,6,8,10\texact"
    assert run(capsys, "profile", "--bound", "10", "--pred", "M", "--strict-exact")[0] == 3
    assert run(capsys, "profile", "--bound", "10", "--pred", "zz")[0] == 2


def test_countermodel(capsys):
    code, out, _ = run(capsys, "countermodel", "--bound", "4", "--proof", C("e1_loop.proof"))
    assert code == 0
    assert out.splitlines()[-1].startswith("verdict\tLoopDetected\tloop_start=0")
    code, out, _ = run(capsys, "countermodel", "--bound", "4", "--proof", C("m_sub_n.proof"))
    assert code == 1 and out.startswith("verdict\tRootNotFalse")


def test_dump_trace_graphs(capsys):
    code, out, _ = run(capsys, "dump-trace-graphs", C("e1_loop.proof"))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "source\ttarget\tpremiss\tedges"
    assert any(l.startswith("n3\tn4\t0\t") and l.endswith("*") for l in lines)


def test_extra_declarations(tmp_path, capsys):
    decls = tmp_path / "q.ind"
    decls.write_text("ind Q := (X, x, or(=(x,0), X(x)))\n")
    assert run(capsys, "eval", "--bound", "3", "--decls", str(decls), "--formula", "Q(0)")[1] == "true\texact\n"


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/file.proof")
    assert code == 2 and "cannot read" in err


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "cycid.cli", "eval", "--bound", "3", "--formula", "N(3)"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "true\texact\n"
