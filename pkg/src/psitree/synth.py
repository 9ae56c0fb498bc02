"""Circuit back-ends for trees, and the level-by-level separability test.

``synth_subtree`` emits multiply-controlled single-qubit unitaries from the
subtree recursion. ``synth_pyramidal`` emits one uniformly controlled y/z
rotation pair per tree level, lowered to Ry, Rz and CNOT.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import DOWN, UP, Circuit, cnot, expand_up_controls, global_phase, ry, rz, unitary
from .errors import IndexOutOfRange
from .tree import PsiTree, canonicalize, fill_dead, node_index, node_unitary

EPS_ANGLE = 1e-8
_IDENTITY_TOL = 1e-12


def _path_controls(level: int, pos: int) -> tuple:
    """Controls selecting the branch that leads to node ``(level, pos)``."""
    return tuple((q, DOWN if (pos >> (level - 1 - q)) & 1 else UP) for q in range(level))


# --------------------------------------------------------------------------
# subtree decomposition


def _node_u(tree: PsiTree, level: int, pos: int) -> np.ndarray:
    k = node_index(level, pos)
    return node_unitary(tree.theta[k], tree.phi[k])


def _gamma(tree: PsiTree, level: int, pos: int, drop_identity: bool) -> list:
    """Entangling gates of the subtree rooted at ``(level, pos)``, temporal order.

    Left-subtree factor (fires on qubit ``level`` up), then the chain of
    ``U_k^right U_k^left^dagger`` for every deeper qubit ``k`` (fires on
    qubit ``level`` down), then the right-subtree factor.
    """
    n = tree.n
    if level >= n - 1:
        return []
    base = _path_controls(level, pos)
    gates = _gamma(tree, level + 1, 2 * pos, drop_identity)
    for k in range(level + 1, n):
        a = (2 * pos + 1) << (k - level - 1)
        b = pos << (k - level)
        m = _node_u(tree, k, a) @ _node_u(tree, k, b).conj().T
        if drop_identity and np.abs(m - np.eye(2)).max() <= _IDENTITY_TOL:
            continue
        gates.append(unitary(k, m, base + ((level, DOWN),), label=f"U[{k},{a}]U[{k},{b}]^dag"))
    gates += _gamma(tree, level + 1, 2 * pos + 1, drop_identity)
    return gates


def synth_subtree(
    tree: PsiTree, drop_identity: bool = True, with_phase: bool = True, literal_x: bool = False
) -> Circuit:
    """Subtree decomposition ``T = Gamma * prod_k U_k^0``.

    The leftmost unitary of every level acts first (qubit 0 first), followed
    by the entangling factor. Dead nodes are given their level's leftmost live
    unitary first, so a separable tree yields no controlled gates; set
    ``drop_identity=False`` to keep identity-valued controlled gates.
    ``literal_x=True`` writes ``up`` controls as X-conjugated ``down`` controls.
    """
    tree = fill_dead(tree)
    n = tree.n
    gates = [unitary(k, _node_u(tree, k, 0), label=f"U[{k},0]") for k in range(n)]
    gates += _gamma(tree, 0, 0, drop_identity)
    if with_phase:
        gates.append(global_phase(tree.global_phase))
    circ = Circuit(n, tuple(gates))
    return expand_up_controls(circ) if literal_x else circ


# --------------------------------------------------------------------------
# pyramidal decomposition


@lru_cache(maxsize=None)
def _gray_controls(k: int) -> tuple:
    """Control qubit of the CNOT after each rotation of a k-control gray cycle.

    Transition ``t`` flips gray bit ``tz(t + 1)`` (the last one wraps around on
    the top bit); gray bit ``b`` is control qubit ``k - 1 - b``.
    """
    out = []
    for t in range(2**k):
        nxt = t + 1
        bit = (nxt & -nxt).bit_length() - 1 if nxt < 2**k else k - 1
        out.append(k - 1 - bit)
    return tuple(out)


@lru_cache(maxsize=None)
def _block_transforms(k: int):
    """Matrices mapping rotation angles of a level to the per-branch angles.

    ``y_signs @ a`` gives the y-angle each branch sees from the y-block angles
    ``a`` (in emission order); ``z_signs @ b`` likewise for the z-block, whose
    angles ``b`` are listed in emission order too.
    """
    ctrls = _gray_controls(k)
    size = 2**k
    branches = np.arange(size)
    # bit of each branch for each control qubit q (qubit 0 most significant)
    bits = np.array([[(c >> (k - 1 - q)) & 1 for q in range(k)] for c in branches])
    e = bits[:, list(ctrls)]  # e[c, t]: does CNOT t flip on branch c
    before = np.concatenate([np.zeros((size, 1), int), np.cumsum(e[:, :-1], axis=1)], axis=1)
    y_signs = (-1.0) ** before
    p_y = e[:, :-1].sum(axis=1)
    # z-block: rotation t (t = L..0 in emission order) sees p_y plus CNOTs t..L-1
    tail = np.cumsum(e[:, :-1][:, ::-1], axis=1)[:, ::-1]  # sum_{s>=t} e_s for t < L
    tail = np.concatenate([tail, np.zeros((size, 1), int)], axis=1)
    z_by_t = (-1.0) ** ((p_y[:, None] + tail) % 2)
    z_signs = z_by_t[:, ::-1]  # emission order is t = L, L-1, ..., 0
    return y_signs, z_signs


def level_angles(tree: PsiTree, k: int):
    """Rotation angles (emission order) of the y- and z-block of level ``k``."""
    sl = tree.level_slice(k)
    thetas, phis = tree.theta[sl], tree.phi[sl]
    if k == 0:
        return thetas.copy(), phis.copy()
    y_signs, z_signs = _block_transforms(k)
    size = 2**k
    # both sign matrices are orthogonal up to a factor 2^k
    return y_signs.T @ thetas / size, z_signs.T @ phis / size


def pyramidal_level(tree: PsiTree, k: int, sparse: bool = False) -> Circuit:
    """Factored level ``k``: y-block then z-block, 2(2^k - 1) CNOTs in total.

    With ``sparse=True`` a level whose live nodes all share one unitary becomes
    a single uncontrolled Ry, Rz pair (dead nodes may take any unitary).
    """
    if sparse and k > 0:
        sl = tree.level_slice(k)
        live = ~tree.dead[sl]
        th, ph = tree.theta[sl][live], tree.phi[sl][live]
        if th.size and np.ptp(th) <= _IDENTITY_TOL and np.ptp(ph) <= _IDENTITY_TOL:
            gates = [ry(k, th[0]), rz(k, ph[0])]
            return Circuit(tree.n, tuple(g for g in gates if abs(g.params[0]) > _IDENTITY_TOL))
    a, b = level_angles(tree, k)
    if k == 0:
        gates = [ry(0, a[0]), rz(0, b[0])]
    else:
        ctrls = _gray_controls(k)
        last = 2**k - 1
        gates = []
        for t in range(2**k):
            gates.append(ry(k, a[t]))
            if t < last:
                gates.append(cnot(ctrls[t], k))
        for t in range(last, -1, -1):
            gates.append(rz(k, b[last - t]))
            if t > 0:
                gates.append(cnot(ctrls[t - 1], k))
    if sparse:
        if max(np.abs(a).max(), np.abs(b).max()) <= _IDENTITY_TOL:
            # the two CNOT ladders cancel, so an all-zero level is the identity
            return Circuit(tree.n)
        gates = [g for g in gates if g.kind == "PauliX" or abs(g.params[0]) > _IDENTITY_TOL]
    return Circuit(tree.n, tuple(gates))


def synth_pyramidal(tree: PsiTree, sparse: bool = False, with_phase: bool = True) -> Circuit:
    """Level-by-level decomposition into Ry, Rz and CNOT.

    Levels are emitted root first. With ``sparse=True`` dead nodes are set to
    identity angles, uniform levels lose their controls and zero-angle
    rotations are dropped; the CNOT count then only bounds the generic count
    from above.
    """
    if sparse:
        tree = tree.replace(
            theta=np.where(tree.dead, 0.0, tree.theta), phi=np.where(tree.dead, 0.0, tree.phi)
        )
    circ = Circuit(tree.n)
    for k in range(tree.n):
        circ = circ + pyramidal_level(tree, k, sparse)
    if with_phase:
        circ = circ + Circuit(tree.n, (global_phase(tree.global_phase),))
    return circ


def level_operator(tree: PsiTree, l: int) -> Circuit:
    """Unfactored level ``l``: one multiply-controlled node unitary per branch."""
    if not 0 <= l < tree.n:
        raise IndexOutOfRange(f"level {l} outside 0..{tree.n - 1}")
    gates = [
        unitary(l, _node_u(tree, l, p), _path_controls(l, p), label=f"U[{l},{p}]")
        for p in range(2**l)
    ]
    return Circuit(tree.n, tuple(gates))


def level_blocks(tree: PsiTree, l: int):
    """Level ``l`` split as (uniformly controlled Ry block, uniformly controlled Rz block).

    Both are unlowered (one multiply-controlled rotation per branch); the y
    block acts first.
    """
    if not 0 <= l < tree.n:
        raise IndexOutOfRange(f"level {l} outside 0..{tree.n - 1}")
    sl = tree.level_slice(l)
    ys = [ry(l, t, _path_controls(l, p)) for p, t in enumerate(tree.theta[sl])]
    zs = [rz(l, f, _path_controls(l, p)) for p, f in enumerate(tree.phi[sl])]
    return Circuit(tree.n, tuple(ys)), Circuit(tree.n, tuple(zs))


# --------------------------------------------------------------------------
# separability


@dataclass(frozen=True)
class SeparabilityVerdict:
    separable: bool
    first_violation: tuple | None = None
    flip_mask: int = 0

    def to_dict(self) -> dict:
        fv = None if self.first_violation is None else list(self.first_violation)
        return {"separable": self.separable, "first_violation": fv}


def is_separable(tree: PsiTree, eps_angle: float = EPS_ANGLE) -> SeparabilityVerdict:
    """Product-state test on the canonical form of ``tree``.

    Every live node of a level must carry the same unitary as the level's
    leftmost node (Frobenius distance at most ``eps_angle``). The first
    offending ``(level, position)`` is reported, scanning top-down and left to
    right.
    """
    canon, mask = canonicalize(tree)
    for j in range(canon.n):
        ref = _node_u(canon, j, 0)
        for i in range(1, 2**j):
            if canon.dead[node_index(j, i)]:
                continue
            if np.linalg.norm(_node_u(canon, j, i) - ref) > eps_angle:
                return SeparabilityVerdict(False, (j, i), mask)
    return SeparabilityVerdict(True, None, mask)
