import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bell, ghz, is_product_oracle, w_state
from psitree.circuit import Circuit, apply_circuit, circuit_unitary, count_gates, census
from psitree.errors import IndexOutOfRange
from psitree.state import product_state, random_state
from psitree.synth import (
    _block_transforms,
    is_separable,
    level_angles,
    level_blocks,
    level_operator,
    pyramidal_level,
    synth_pyramidal,
    synth_subtree,
)
from psitree.tree import build_tree, node_index, tree_to_state

CNOT_FORMULA = {n: 2 ** (n + 1) - 2 * n - 2 for n in range(1, 11)}


def _out(circ):
    return apply_circuit(circ).amplitudes


def test_cnot_formula_values():
    assert [CNOT_FORMULA[n] for n in range(2, 10)] == [2, 8, 22, 52, 114, 240, 494, 1004]


@pytest.mark.parametrize("n", range(1, 11))
def test_pyramidal_cnot_count(n):
    t = build_tree(random_state(n, 100 + n))
    assert not t.dead.any()
    assert count_gates(synth_pyramidal(t)).cnot == CNOT_FORMULA[n]


def test_rotations_per_level():
    t = build_tree(random_state(5, 0))
    for k in range(5):
        c = census(pyramidal_level(t, k))
        assert c[("RotY", 0)] == 2**k and c[("RotZ", 0)] == 2**k
        assert c.get(("PauliX", 1), 0) == 2 * (2**k - 1)


@pytest.mark.parametrize("n", range(1, 8))
def test_back_ends_agree(n):
    for seed in range(50):
        t = build_tree(random_state(n, seed))
        a, b = _out(synth_subtree(t)), _out(synth_pyramidal(t))
        assert np.allclose(a, b, atol=1e-9, rtol=0)


def test_pyramidal_fidelity_n4():
    v = random_state(4, 21)
    t = build_tree(v)
    out = _out(synth_pyramidal(t, with_phase=False))
    assert abs(np.vdot(tree_to_state(t).amplitudes, out)) ** 2 >= 1 - 1e-9


def test_level_one_closed_form():
    t = build_tree(random_state(2, 5))
    th0, th1 = t.theta[node_index(1, 0)], t.theta[node_index(1, 1)]
    ph0, ph1 = t.phi[node_index(1, 0)], t.phi[node_index(1, 1)]
    gates = pyramidal_level(t, 1).gates
    assert [(g.kind, g.target, g.controls) for g in gates] == [
        ("RotY", 1, ()),
        ("PauliX", 1, ((0, "down"),)),
        ("RotY", 1, ()),
        ("RotZ", 1, ()),
        ("PauliX", 1, ((0, "down"),)),
        ("RotZ", 1, ()),
    ]
    angles = [g.params[0] for g in gates if g.kind != "PauliX"]
    expect = [(th0 + th1) / 2, (th0 - th1) / 2, (ph0 - ph1) / 2, (ph0 + ph1) / 2]
    assert np.allclose(angles, expect, atol=1e-15)


@pytest.mark.parametrize("k", range(1, 7))
def test_sign_matrices_are_hadamard_like(k):
    y, z = _block_transforms(k)
    assert np.allclose(y @ y.T, 2**k * np.eye(2**k))
    assert np.allclose(z @ z.T, 2**k * np.eye(2**k))


@pytest.mark.parametrize("n", range(2, 6))
def test_factored_level_equals_level_operator(n):
    t = build_tree(random_state(n, n))
    for l in range(n):
        f = circuit_unitary(pyramidal_level(t, l))
        u = circuit_unitary(level_operator(t, l))
        assert np.allclose(f, u, atol=1e-12)


def test_level_operator_shapes():
    t = build_tree(random_state(3, 1))
    g0 = level_operator(t, 0).gates
    assert len(g0) == 1 and g0[0].controls == ()
    g1 = level_operator(t, 1).gates
    assert [g.controls for g in g1] == [((0, "up"),), ((0, "down"),)]
    with pytest.raises(IndexOutOfRange):
        level_operator(t, 3)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_level_gates_commute(l, rng):
    t = build_tree(random_state(4, l))
    gates = list(level_operator(t, l).gates)
    ref = circuit_unitary(Circuit(4, tuple(gates)))
    for _ in range(5):
        perm = rng.permutation(len(gates))
        assert np.allclose(circuit_unitary(Circuit(4, tuple(gates[i] for i in perm))), ref, atol=1e-12)


def test_z_block_mobility():
    n = 4
    t = build_tree(random_state(n, 3))
    blocks = [level_blocks(t, l) for l in range(n)]
    ordered = Circuit(n)
    for y, z in blocks:
        ordered = ordered + y + z
    moved = Circuit(n)
    for y, _ in blocks:
        moved = moved + y
    for _, z in blocks:
        moved = moved + z
    assert np.allclose(_out(ordered), _out(moved), atol=1e-10)
    assert np.allclose(_out(ordered) * np.exp(1j * t.global_phase), random_state(n, 3).amplitudes, atol=1e-10)


def test_sparse_mode():
    v = np.zeros(16)
    v[[0, 5]] = 1 / np.sqrt(2)
    t = build_tree(v)
    sparse = synth_pyramidal(t, sparse=True)
    assert np.allclose(_out(sparse), v, atol=1e-12)
    assert count_gates(sparse).cnot < CNOT_FORMULA[4]


def test_sparse_matches_dense_on_generic_states():
    for seed in range(5):
        t = build_tree(random_state(4, seed))
        assert np.allclose(_out(synth_pyramidal(t, sparse=True)), _out(synth_pyramidal(t)), atol=1e-12)


def test_sparse_basis_state_needs_no_cnots():
    for k in (0, 5, 15):
        v = np.zeros(16)
        v[k] = 1
        circ = synth_pyramidal(build_tree(v), sparse=True)
        assert count_gates(circ).cnot == 0
        assert np.allclose(_out(circ), v, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, math.pi), st.floats(-math.pi, math.pi)), min_size=1, max_size=5))
def test_sparse_product_states_are_cnot_free(angles):
    qubits = [[math.cos(t / 2), np.exp(1j * f) * math.sin(t / 2)] for t, f in angles]
    v = product_state(qubits).amplitudes
    circ = synth_pyramidal(build_tree(v), sparse=True)
    assert count_gates(circ).controlled_total == 0
    assert abs(np.vdot(v, _out(circ))) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_subtree_separable_has_no_controls():
    v = product_state([[1, 1], [1, 0], [1, -1]])
    t = build_tree(v)
    c = synth_subtree(t)
    assert count_gates(c).controlled_total == 0
    assert len(c) == 3 + 1
    assert np.allclose(_out(c), v.amplitudes, atol=1e-12)


def test_subtree_literal_x():
    t = build_tree(random_state(3, 2))
    lit = synth_subtree(t, literal_x=True)
    assert all(p == "down" for g in lit for _, p in g.controls)
    assert np.allclose(_out(lit), _out(synth_subtree(t)), atol=1e-12)


def test_subtree_keeps_identity_gates_when_asked():
    t = build_tree(product_state([[1, 2], [3, 1j]]))
    assert count_gates(synth_subtree(t, drop_identity=False)).controlled_total == 1


def test_separability_examples():
    plus, minus = [1, 1], [1, -1]
    assert is_separable(build_tree(product_state([plus, [1, 0], minus]))).separable
    v = is_separable(build_tree(bell()))
    assert not v.separable and v.first_violation == (1, 1)
    v = is_separable(build_tree(ghz(3)))
    assert not v.separable and v.first_violation[0] == 1
    assert v.to_dict() == {"separable": False, "first_violation": [1, 1]}


def _random_product(rng, n):
    qubits = []
    for _ in range(n):
        r = rng.random()
        if r < 0.15:
            qubits.append([1, 0])
        elif r < 0.3:
            qubits.append([0, 1])
        else:
            qubits.append(rng.normal(size=2) + 1j * rng.normal(size=2))
    return product_state(qubits).amplitudes


def test_separability_against_oracle(rng):
    states = [bell(), ghz(3), ghz(4), w_state(3), w_state(5)]
    for _ in range(200):
        states.append(_random_product(rng, int(rng.integers(1, 6))))
    for _ in range(200):
        states.append(random_state(int(rng.integers(2, 6)), int(rng.integers(2**31))).amplitudes)
    mismatches = 0
    for v in states:
        mismatches += is_separable(build_tree(v)).separable != is_product_oracle(v)
    assert mismatches == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_separable_trees_give_trivial_gamma(n, seed):
    rng = np.random.default_rng(seed)
    v = _random_product(rng, n)
    t = build_tree(v)
    assert is_separable(t).separable
    c = synth_subtree(t)
    assert count_gates(c).controlled_total == 0
    assert np.allclose(_out(c), v, atol=1e-10)


def test_dead_node_fill_leaves_pyramidal_count():
    v = np.zeros(8, dtype=complex)
    v[[1, 6]] = [0.6, 0.8j]
    t = build_tree(v)
    assert t.dead.any()
    c = synth_pyramidal(t)
    assert count_gates(c).cnot == CNOT_FORMULA[3]
    assert np.allclose(_out(c), v, atol=1e-12)
