import json
import subprocess
import sys

import pytest

from fcf.cli import main, run_query
from fcf.model import ModelError, dumps, load, loads
from conftest import DATA

E1 = str(DATA / "e1.json")
T1 = str(DATA / "t1.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_load_e1():
    m = load(E1)
    assert len(m.frame_specs) == 5 and len(m.potentials) == 2
    assert m.names["A"] == ["a1", "a2"]


def test_load_errors(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    with pytest.raises(ModelError, match="empty"):
        load(empty)
    with pytest.raises(ModelError, match="line 1 column"):
        loads('{"version": 1,')
    raw = json.loads((DATA / "e1.json").read_text())
    raw["potentials"]["pA"]["frame"] = "NOPE"
    with pytest.raises(ModelError, match=r"\$\.potentials\.pA\.frame: unknown frame 'NOPE'"):
        loads(json.dumps(raw))
    raw = json.loads((DATA / "e1.json").read_text())
    raw["frames"]["A"]["blocks"] = [[1, 2], [2, 3, 4]]
    with pytest.raises(ModelError, match=r"\$\.frames\.A.*overlaps"):
        loads(json.dumps(raw))
    with pytest.raises(ModelError, match="version"):
        loads('{"universe": [1]}')


def test_out_of_order_blocks_keep_declared_values():
    m = loads(json.dumps({
        "version": 1, "universe": [1, 2],
        "frames": {"F": {"blocks": [[2], [1]], "names": ["second", "first"]}},
        "potentials": {"p": {"frame": "F", "values": [7, 5]}},
    }))
    assert m.potentials["p"].values.tolist() == [5, 7]
    assert m.names["F"] == ["first", "second"]
    assert loads(dumps(m)) == m


@pytest.mark.parametrize("path", [E1, T1])
def test_round_trip(path):
    m = load(path)
    again = loads(dumps(m))
    assert again == m
    assert dumps(again) == dumps(m)


def test_marginal_query(capsys):
    code, out, _ = run(capsys, T1, "marginal", "--tree", "T1", "--node", "v1")
    assert code == 0
    assert out.splitlines()[3:7] == ["x=0,y=0 2", "x=0,y=1 8", "x=1,y=0 6", "x=1,y=1 16"]


def test_combine_normalize(capsys):
    code, out, _ = run(capsys, E1, "combine", "pA", "pB", "--normalize")
    assert code == 0
    assert out.splitlines()[1:] == [
        "frame TOP", "t1 0.166666666667", "t2 0.233333333333", "t3 0.25", "t4 0.35"
    ]


def test_support_query(capsys):
    assert run(capsys, E1, "support", "PAS1", "a1")[1].splitlines()[-1] == "support=0.8"


def test_mpe_queries(capsys):
    out = run(capsys, E1, "mpe", "--tree", "STAR", "--oracle")[1].splitlines()
    assert out[1:] == ["value=21", "t4", "oracle_value_dev=0", "oracle_configurations_equal=true"]
    out = run(capsys, T1, "mpe", "--tree", "T1")[1].splitlines()
    assert out[1:] == ["value=8", "x=1,y=1,z=0", "x=1,y=1,z=1"]
    out = run(capsys, T1, "mpe", "--tree", "T1", "--one")[1].splitlines()
    assert out[1:] == ["value=8", "x=1,y=1,z=0"]


def test_trace_lines(capsys):
    out = run(capsys, T1, "marginal", "--tree", "T1", "--trace")[1].splitlines()
    assert out[1] == "MSG v2->v1 label=XY values=[2,4,2,4]"
    assert out[2] == "MSG v1->v2 label=YZ values=[4,4,6,6]"


@pytest.mark.parametrize("arch", ["ss", "ls", "hugin"])
def test_arch_oracle(capsys, arch):
    lines = run(capsys, E1, "marginal", "--tree", "STARTOP", "--arch", arch, "--oracle")[1].splitlines()
    assert lines[-2] == "messages=4"
    assert float(lines[-1].split("=")[1]) < 1e-9


def test_contradiction_exit_code(capsys):
    code, out, err = run(capsys, E1, "combine", "SURE1", "SURE2")
    assert code == 2 and out == "" and "contradict" in err
    assert run(capsys, E1, "combine", "onlyA1", "onlyA2", "--normalize")[0] == 2


def test_error_exit_codes(capsys):
    assert run(capsys, E1, "marginal", "--tree", "BAD")[0] == 1
    assert run(capsys, E1, "combine", "nope")[0] == 1
    assert run(capsys, E1, "frobnicate")[0] == 1
    assert run(capsys, str(DATA / "missing.json"), "dump")[0] == 1
    code, out, _ = run(capsys, E1, "marginal", "--tree", "BAD", "--trust-tree")
    assert code == 0


def test_other_verbs(capsys):
    assert run(capsys, E1, "verify-tree", "--tree", "BAD")[1].splitlines()[-1] == "false"
    assert run(capsys, E1, "verify-tree", "--tree", "STAR")[1].splitlines()[-1] == "true"
    assert run(capsys, E1, "check-ci", "A", "B", "--given", "E")[1].splitlines()[-1] == "true"
    assert run(capsys, E1, "transport", "pA", "B")[1].splitlines()[-2:] == ["b1 5", "b2 5"]
    assert run(capsys, E1, "normalize", "pA")[1].splitlines()[-2:] == ["a1 0.4", "a2 0.6"]
    assert run(capsys, E1, "plausibility", "mA", "a2")[1].splitlines()[-1] == "plausibility=0.4"
    out = run(capsys, T1, "conditional", "q1", "X", "Y")[1].splitlines()
    assert out[-1] == "x=1,y=1 0.666666666667"
    out = run(capsys, E1, "combine", "PAS1", "PAS2")[1].splitlines()
    assert out[1:] == ["frame TOP", "{t1} 0.48", "{t2} 0.32", "{t3} 0.12", "{t4} 0.08"]
    out = run(capsys, T1, "equiv-report", "q1", "X", "Y", "E")[1].splitlines()
    assert out[-1] == "consistent=true" and len(out) == 10


def test_run_query_in_process():
    lines = run_query(load(E1), ["combine", "pA", "pB"])
    assert lines == ["frame TOP", "t1 10", "t2 14", "t3 15", "t4 21"]


def test_module_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "fcf", E1, "marginal", "--tree", "STARTOP", "--arch", "hugin", "--trace"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"query: ")
    bad = subprocess.run([sys.executable, "-m", "fcf", E1, "combine", "SURE1", "SURE2"], capture_output=True)
    assert bad.returncode == 2
