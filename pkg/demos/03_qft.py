"""The Fourier transform read off its tree, compared with the DFT matrix.

Run: python3 demos/03_qft.py
"""
import numpy as np

from psitree.circuit import census, circuit_unitary, export_qasm
from psitree.qft import dft_matrix, qft_branch_check, qft_circuit, qft_node, qft_tree_circuit

print("node parameters for n = 3")
for level in range(3):
    for k in range(2**level):
        p = qft_node(level, k)
        print(f"  U[{level},{k}]  phi={p.phi:.6f}  sign={p.sign:+d}")

for n in range(1, 7):
    f = dft_matrix(n)
    textbook = np.abs(circuit_unitary(qft_circuit(n)) - f).max()
    from_tree = np.abs(circuit_unitary(qft_tree_circuit(n)) - f).max()
    columns = max(np.abs(qft_branch_check(n, k).amplitudes - f[:, k]).max() for k in range(2**n))
    print(f"n={n}: textbook {textbook:.1e}  tree levels {from_tree:.1e}  single branches {columns:.1e}")

print("\ncensus n=4:", census(qft_circuit(4)))
print(export_qasm(qft_circuit(3)))
