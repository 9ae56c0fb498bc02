"""Merging two nearly parallel subtrees and the fidelity it costs.

The state is alpha|0>Psi1 + beta|1>Psi2 with |<Psi1|Psi2>| = kappa. Pruning
keeps one branch; for |alpha| = |beta| the retained fidelity is lambda+^2.

Run: python3 demos/04_pruning.py
"""
import numpy as np

from psitree import build_tree, random_state
from psitree.compress import prune, pruned_state
from psitree.state import fidelity


def pair(kappa, m=3, seed=0):
    p1 = random_state(m, seed).amplitudes
    perp = random_state(m, seed + 1).amplitudes.copy()
    perp -= np.vdot(p1, perp) * p1
    perp /= np.linalg.norm(perp)
    p2 = kappa * p1 + np.sqrt(1 - kappa**2) * perp
    return np.concatenate([p1, p2]) / np.sqrt(2)


print("  |kappa|   lambda+^2     measured")
for kappa in (1.0, 0.999, 0.99, 0.9, 0.5):
    v = pair(kappa)
    pruned, info = prune(build_tree(v), (0, 0), tolerance=1.0)
    measured = fidelity(pruned_state(pruned, info), v).fidelity
    print(f"  {kappa:7.3f}  {info.lambda_plus**2:.12f}  {measured:.12f}")

pruned, info = prune(build_tree(pair(0.99)), (0, 0), tolerance=0.02)
print("\nlive nodes before/after:", 2**4 - 1, int((~pruned.dead).sum()))
print("restoring rotation:", info.rotation.gates[0].kind, "on qubit", info.rotation.gates[0].target)
