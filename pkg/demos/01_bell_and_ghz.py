"""Trees of a few textbook states, and what the separability test makes of them.

Run: python3 demos/01_bell_and_ghz.py
"""
import numpy as np

from psitree import build_tree, is_separable, synth_subtree
from psitree.circuit import count_gates
from psitree.tree import format_bloch_table

bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
ghz3 = np.zeros(8)
ghz3[[0, 7]] = 1 / np.sqrt(2)
plus_zero = np.kron([1, 1], [1, 0]) / np.sqrt(2)

for name, amps in [("bell", bell), ("ghz3", ghz3), ("|+>|0>", plus_zero)]:
    tree = build_tree(amps)
    print(f"== {name}")
    print(format_bloch_table(tree))
    print("separability:", is_separable(tree).to_dict())
    # a product state leaves no controlled gates behind in the subtree circuit
    counts = count_gates(synth_subtree(tree))
    print(f"subtree circuit: {counts.controlled_total} controlled, {counts.single_qubit} single-qubit\n")
