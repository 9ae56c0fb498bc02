import math

import numpy as np
import pytest

from psitree.circuit import census, circuit_unitary, count_gates
from psitree.errors import IndexOutOfRange, TooLarge
from psitree.qft import (
    dft_matrix,
    qft_branch_check,
    qft_circuit,
    qft_factored_level,
    qft_node,
    qft_params,
    qft_tree_circuit,
    qft_tree_level,
)


def test_dft_matrix_is_unitary_with_positive_exponent():
    f = dft_matrix(2)
    assert np.allclose(f @ f.conj().T, np.eye(4))
    assert f[1, 1] == pytest.approx(0.5j)


def test_node_examples():
    p = qft_node(1, 0)
    assert p.phi == 0 and p.sign == 1
    assert qft_node(2, 1).phi == pytest.approx(math.pi / 2)
    p = qft_node(3, 5)
    assert p.phi == pytest.approx(5 * math.pi / 4)
    assert p.sign == -1 and p.scalar_phase == pytest.approx(5 * math.pi / 16)


def test_periodicity():
    for l in range(1, 6):
        for k in range(3 * 2**l):
            assert qft_node(l, k) == qft_node(l, k % 2**l)


def test_params_cover_every_node():
    ps = qft_params(4)
    assert len(ps) == 2**4 - 1
    assert ps[(0, 0)].phi == 0


def test_node_unitary_form():
    p = qft_node(2, 3)
    u = p.unitary()
    c = math.sqrt(0.5)
    rz = np.diag([np.exp(-1j * p.phi / 4), np.exp(1j * p.phi / 4)])
    ry = np.array([[c, -c], [c, c]])
    assert np.allclose(u, -np.exp(1j * p.phi / 4) * rz @ ry)


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("swaps", ["trailing", "leading"])
def test_circuit_is_dft(n, swaps):
    assert np.abs(circuit_unitary(qft_circuit(n, swaps)) - dft_matrix(n)).max() < 1e-10


@pytest.mark.parametrize("n", range(1, 7))
def test_gate_census(n):
    c = census(qft_circuit(n))
    assert c[("Hadamard", 0)] == n
    assert c.get(("PhaseShift", 1), 0) == n * (n - 1) // 2
    assert c.get(("Swap", 0), 0) == n // 2
    assert set(c) <= {("Hadamard", 0), ("PhaseShift", 1), ("Swap", 0)}


def test_small_circuits():
    assert [g.kind for g in qft_circuit(1)] == ["Hadamard"]
    g = qft_circuit(2).gates
    assert [(x.kind, x.target, x.controls) for x in g] == [
        ("Hadamard", 0, ()),
        ("PhaseShift", 0, ((1, "down"),)),
        ("Hadamard", 1, ()),
        ("Swap", 0, ()),
    ]
    assert g[1].params[0] == pytest.approx(math.pi / 2)
    assert count_gates(qft_circuit(3)).controlled_total == 3


def test_too_large():
    with pytest.raises(TooLarge):
        qft_circuit(11)


@pytest.mark.parametrize("n", range(1, 6))
def test_tree_assembled_transform(n):
    assert np.abs(circuit_unitary(qft_tree_circuit(n)) - dft_matrix(n)).max() < 1e-10


@pytest.mark.parametrize("n", range(2, 6))
@pytest.mark.parametrize("digit_reversed", [True, False])
def test_factor_out_identity(n, digit_reversed):
    for l in range(n):
        tree = circuit_unitary(qft_tree_level(n, l, digit_reversed))
        fact = circuit_unitary(qft_factored_level(n, l, digit_reversed))
        assert np.abs(tree - fact).max() < 1e-10


def test_verbatim_level_uses_params_directly():
    for g, p in zip(qft_tree_level(3, 2, digit_reversed=False).gates, range(4)):
        assert np.allclose(g.matrix(), qft_node(2, p).unitary())


@pytest.mark.parametrize("n", range(1, 9))
def test_branch_check_columns(n):
    f = dft_matrix(n)
    for k in range(2**n):
        assert np.abs(qft_branch_check(n, k).amplitudes - f[:, k]).max() < 1e-10


def test_branch_examples():
    assert np.allclose(qft_branch_check(1, 0).amplitudes, [math.sqrt(0.5)] * 2)
    assert np.allclose(qft_branch_check(2, 1).amplitudes, np.array([1, 1j, -1, -1j]) / 2)
    assert np.allclose(qft_branch_check(3, 0).amplitudes, [1 / math.sqrt(8)] * 8)
    with pytest.raises(IndexOutOfRange):
        qft_branch_check(2, 4)
