"""CNOT cost of the pyramidal back-end against 2^(n+1) - 2n - 2.

Run: python3 demos/02_pyramidal_counts.py
"""
from psitree import build_tree, random_state, synth_pyramidal
from psitree.circuit import apply_circuit, count_gates
from psitree.state import fidelity

print(" n  cnot  formula  sparse(basis)  fidelity")
for n in range(1, 10):
    target = random_state(n, n)
    circ = synth_pyramidal(build_tree(target))
    # a basis state needs no entangling gates once idle levels are dropped
    basis = [0.0] * 2**n
    basis[-1] = 1.0
    sparse = synth_pyramidal(build_tree(basis), sparse=True)
    f = fidelity(apply_circuit(circ), target).fidelity
    print(f"{n:2d}  {count_gates(circ).cnot:4d}  {2 ** (n + 1) - 2 * n - 2:7d}  {count_gates(sparse).cnot:13d}  {f:.15f}")
