"""Local basis changes that clear every single-flip amplitude.

For two qubits this is the ordinary Schmidt decomposition, and the state
needs one CNOT. For three qubits the solver removes 3m + 1 = 10 parameters.

Run: python3 demos/05_generalized_schmidt.py
"""
import numpy as np

from psitree import random_state
from psitree.circuit import apply_circuit, count_gates
from psitree.compress import partner_amplitudes, schmidt_2q, single_flip_amplitudes, solve_generalized_schmidt
from psitree.state import fidelity

np.set_printoptions(precision=4, suppress=True)

two = random_state(2, 3)
theta, transform, circ = schmidt_2q(two)
rebuilt = transform.invert(apply_circuit(circ))
print(f"two qubits: theta={theta:.6f}, cnot={count_gates(circ).cnot}, fidelity={fidelity(rebuilt, two).fidelity:.15f}")

three = random_state(3, 3)
transform, hat = solve_generalized_schmidt(three)
a = hat.amplitudes
print("\nthree qubits, normal-form amplitudes:")
for k, amp in enumerate(a):
    print(f"  |{k:03b}>  {amp:.6f}")
print("single flips:", np.abs(single_flip_amplitudes(a)))
print("partners (real, >= 0):", partner_amplitudes(a))
print("undo fidelity:", fidelity(transform.invert(hat), three).fidelity)
