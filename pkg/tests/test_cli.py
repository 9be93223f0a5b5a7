import io
import json
import subprocess
import sys

import pytest

from recheck.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_PARSE, main


def call(argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def src(tmp_path):
    def write(text, name="prog.ml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_check_accepts_ones(src):
    path = src("let rec ones = Cons(One, ones) in ones")
    code, out, _ = call(["check", path])
    assert code == EXIT_OK
    assert out == f"{path}:1:9: accepted: ones\n"


def test_check_rejects_self_reference(src):
    path = src("let rec x = x in x")
    code, out, _ = call(["check", path])
    assert code == EXIT_FAIL
    assert out == f"{path}:1:13: rejected: 'x' used at mode return in definition of 'x' (must be guard or lower)\n"


def test_check_parse_error(src):
    path = src("let rec = in")
    code, out, err = call(["check", path])
    assert code == EXIT_PARSE
    assert out == ""
    assert f"{path}:1:9: error:" in err


def test_check_unbound_is_parse_error(src):
    code, _, err = call(["check", src("fun x -> y")])
    assert code == EXIT_PARSE
    assert "unbound variable 'y'" in err


def test_check_missing_file(tmp_path):
    code, _, err = call(["check", str(tmp_path / "nope.ml")])
    assert code == EXIT_PARSE
    assert "recheck:" in err


def test_check_json(src):
    path = src("let rec x = match x with Foo -> Foo in x")
    code, out, _ = call(["check", path, "--json"])
    assert code == EXIT_FAIL
    data = json.loads(out)
    assert data == {
        "verdicts": [
            {
                "accepted": False,
                "names": ["x"],
                "offenders": [
                    {"at": {"col": 19, "line": 1}, "definition": "x", "mode": "dereference", "variable": "x"}
                ],
            }
        ]
    }


def test_check_stdin(monkeypatch):
    code, out, _ = call(["check", "-"], stdin="let rec f = fun x -> f x in f", monkeypatch=monkeypatch)
    assert code == EXIT_OK
    assert out.startswith("<stdin>:1:9: accepted: f")


def test_infer_json(src):
    code, out, _ = call(["infer", src("fun z -> y"), "--json"])
    assert code == EXIT_OK
    assert json.loads(out) == {"mode": "return", "env": {"y": "delay"}, "verdicts": []}
    # keys are sorted for golden comparisons
    assert out == json.dumps(json.loads(out), sort_keys=True, indent=2) + "\n"


def test_infer_modes(src):
    path = src("K(x)")
    code, out, _ = call(["infer", path, "--mode", "dereference", "--json"])
    assert json.loads(out)["env"] == {"x": "dereference"}
    code, out, _ = call(["infer", path, "--mode", "guard"])
    assert out == "mode: guard\nx: guard\n"


def test_infer_closed_term(src):
    code, out, _ = call(["infer", src("let rec xs = Cons(K, xs) in xs"), "--json"])
    assert code == EXIT_OK
    assert json.loads(out)["env"] == {}


def test_infer_reports_rejections(src):
    code, out, _ = call(["infer", src("let rec x = x in K(y)"), "--json"])
    assert code == EXIT_FAIL
    data = json.loads(out)
    assert data["env"] == {"y": "guard"}
    assert data["verdicts"][0]["accepted"] is False


def test_eval_beta_chain(src):
    code, out, _ = call(["eval", src("(fun a -> (fun b -> b) a) K")])
    assert code == EXIT_OK
    assert out.splitlines() == ["step 1: beta at root", "step 2: beta at root", "term: K", "result: normal"]


def test_eval_vicious(src):
    code, out, _ = call(["eval", src("let rec x = match x with K -> K in x")])
    assert code == EXIT_FAIL
    assert out.splitlines()[-1] == "result: vicious"


def test_eval_budget(src):
    path = src("let rec x = Cons(One, x) in match x with Cons(a, b) -> b")
    code, out, _ = call(["eval", path, "--strategy", "leftmost-innermost", "--max-steps", "5"])
    assert code == EXIT_BUDGET
    assert out.splitlines()[-1] == "result: budget"
    assert len([line for line in out.splitlines() if line.startswith("step ")]) == 5


def test_eval_negative_budget(src):
    code, _, err = call(["eval", src("K"), "--max-steps", "-1"])
    assert code == EXIT_PARSE
    assert "non-negative" in err


def test_eval_seed_env_override(src, monkeypatch):
    path = src("let rec f = fun x -> (x, x) in (f K, f J, f (f K))")
    _, a, _ = call(["eval", path, "--strategy", "random", "--seed", "3"])
    monkeypatch.setenv("RECHECK_SEED", "3")
    _, b, _ = call(["eval", path, "--strategy", "random", "--seed", "99"])
    assert a == b
    monkeypatch.setenv("RECHECK_SEED", "4")
    _, c, _ = call(["eval", path, "--strategy", "random", "--seed", "3"])
    assert c != a


def test_fuzz_zero_programs():
    code, out, _ = call(["fuzz", "--programs", "0"])
    assert code == EXIT_OK
    assert "0 programs" in out


def test_fuzz_small_run():
    code, out, _ = call(["fuzz", "--programs", "30", "--traces", "3"])
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "result: no vicious outcome"


def test_fuzz_flag_is_hidden():
    out = io.StringIO()
    with pytest.raises(SystemExit):
        sys_stdout = sys.stdout
        sys.stdout = out
        try:
            main(["fuzz", "--help"])
        finally:
            sys.stdout = sys_stdout
    assert "inject" not in out.getvalue()


def test_console_script_runs(src):
    path = src("let rec x = x in x")
    proc = subprocess.run([sys.executable, "-m", "recheck.cli", "check", path], capture_output=True, text=True)
    assert proc.returncode == EXIT_FAIL
    assert "rejected" in proc.stdout
