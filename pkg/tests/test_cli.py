import io
import json
import math

import numpy as np
import pytest

from conftest import bell, ghz
from psitree import cli
from psitree.circuit import Circuit, cnot, ry
from psitree.errors import ConvergenceFailure
from psitree.io import format_statevector, parse_statevector, write_statevector
from psitree.state import TargetState, random_state


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(map(str, argv)), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def make(name, state, as_json=False):
        path = tmp_path / name
        write_statevector(path, state if isinstance(state, TargetState) else TargetState(int(math.log2(len(state))), state), as_json)
        return path

    return make


def test_synth_bell_qasm(files):
    code, out, err = call("synth", "--backend", "pyramidal", "--format", "qasm", files("bell.vec", bell()))
    assert code == 0
    assert "OPENQASM 2.0;\n" in out and "cx q[0],q[1];" in out
    report = json.loads(err)
    assert report["cnot"] == 2 and report["fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_synth_to_file_reports_on_stdout(files, tmp_path):
    target = tmp_path / "out.json"
    code, out, err = call("synth", "--backend", "subtree", files("s.vec", random_state(3, 1)), "-o", target)
    assert code == 0 and err == ""
    assert json.loads(out)["backend"] == "subtree"
    assert Circuit.from_json(target.read_text()).n == 3


def test_synth_then_verify(files, tmp_path):
    vec = files("r.vec", random_state(4, 2), as_json=True)
    circ = tmp_path / "c.json"
    assert call("synth", vec, "--format", "json", "-o", circ)[0] == 0
    code, out, _ = call("verify", circ, vec)
    assert code == 0 and json.loads(out)["fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_verify_mismatch_exits_1(files, tmp_path):
    circ = tmp_path / "c.json"
    circ.write_text(Circuit(2, (ry(0, math.pi / 2), cnot(0, 1))).to_json())
    wrong = np.zeros(4)
    wrong[[1, 2]] = 1 / math.sqrt(2)
    code, out, err = call("verify", circ, files("w.vec", wrong))
    assert code == 1
    assert json.loads(out)["fidelity"] == pytest.approx(0.0, abs=1e-15)
    assert json.loads(err)["exit_code"] == 1


def test_subtree_qasm_rejected(tmp_path):
    code, out, err = call("synth", "--backend", "subtree", "--format", "qasm", tmp_path / "missing.vec")
    assert code == 2 and out == ""
    line = json.loads(err)
    assert set(line) == {"error", "message", "exit_code"} and line["exit_code"] == 2


@pytest.mark.parametrize(
    "content",
    ["", "2\n1 0\n0 0\n0 0\n", "1\n1 0 0\n0 0\n", "x\n1 0\n0 0\n", '{"n": 1}', "1\n0 0\n0 0\n"],
)
def test_bad_input_exits_2(tmp_path, content):
    path = tmp_path / "bad.vec"
    path.write_text(content)
    code, _, err = call("synth", path)
    assert code == 2
    assert err.count("\n") == 1 and json.loads(err)["exit_code"] == 2


def test_missing_file_and_bad_flags(tmp_path):
    assert call("synth", tmp_path / "nope.vec")[0] == 2
    assert call("synth", "x.vec", "--tolerance", "-1")[0] == 2
    assert call("qft")[0] == 2
    assert call("prune", "x.vec", "--node", "bogus")[0] == 2


def test_qft_check():
    code, out, err = call("qft", "--n", 3, "--check")
    assert code == 0
    assert out.count("h q[") == 3 and out.count("swap") == 1
    assert json.loads(err)["max_deviation"] < 1e-10


def test_qft_too_large():
    assert call("qft", "--n", 11)[0] == 2


def test_separability(files):
    code, out, _ = call("separability", files("ghz3.vec", ghz(3)))
    assert code == 0 and json.loads(out) == {"separable": False, "first_violation": [1, 1]}
    prod = np.kron([0.6, 0.8j], [1 / math.sqrt(2), -1 / math.sqrt(2)])
    assert json.loads(call("separability", files("p.vec", prod))[1]) == {"separable": True, "first_violation": None}


def test_prune(files, tmp_path):
    rng = np.random.default_rng(3)
    half = rng.normal(size=4) + 1j * rng.normal(size=4)
    half /= np.linalg.norm(half)
    other = half + 0.01 * (rng.normal(size=4) + 1j * rng.normal(size=4))
    other /= np.linalg.norm(other)
    vec = files("p.vec", np.concatenate([half, other]) / math.sqrt(2))
    code, out, _ = call("prune", vec, "--node", "0:0", "--tolerance", 1e-3)
    assert code == 0
    rep = json.loads(out)
    assert rep["measured_fidelity"] == pytest.approx(rep["fidelity"], abs=1e-12)
    assert rep["tree"]["n"] == 3
    code, out, err = call("prune", vec, "--node", "0:0", "--tolerance", 1e-6)
    assert code == 2 and json.loads(err)["error"] == "ToleranceExceeded"


def test_schmidt(files):
    code, out, _ = call("schmidt", files("s.vec", random_state(3, 4)))
    assert code == 0
    rep = json.loads(out)
    assert rep["single_flip_max"] < 1e-8 and abs(rep["reference_phase"]) < 1e-10
    assert max(abs(p) for p in rep["partner_phases"]) < 1e-10
    rep2 = json.loads(call("schmidt", files("b.vec", random_state(2, 4)))[1])
    assert "two_qubit" in rep2


def test_schmidt_convergence_failure_exits_3(files, monkeypatch):
    def fail(*args, **kwargs):
        raise ConvergenceFailure("no start reached the residual bound", 0.5)

    monkeypatch.setattr(cli, "solve_generalized_schmidt", fail)
    code, _, err = call("schmidt", files("s.vec", random_state(3, 4)))
    assert code == 3 and json.loads(err)["error"] == "ConvergenceFailure"


def test_tree_dump(files):
    code, out, _ = call("tree", files("b.vec", bell()), "--dump")
    assert code == 0 and len(out.splitlines()) >= 3
    code, out, _ = call("tree", files("b.vec", bell()))
    assert json.loads(out)["n"] == 2


@pytest.mark.parametrize("argv", [("synth",), ("synth", "--backend", "subtree"), ("tree", "--dump"), ("schmidt",)])
def test_byte_identical_runs(files, argv):
    vec = files("d.vec", random_state(3, 11))
    assert call(*argv, vec) == call(*argv, vec)


def test_statevector_round_trip():
    s = random_state(3, 5)
    for as_json in (False, True):
        back = parse_statevector(format_statevector(s, as_json))
        assert np.array_equal(back.amplitudes, s.amplitudes)


def test_text_format_allows_comments_and_blank_lines():
    s = parse_statevector("# bell\n2\n\n0.7071067811865476 0\n0 0\n0 0\n0.7071067811865476 0\n")
    assert np.allclose(s.amplitudes, bell())
