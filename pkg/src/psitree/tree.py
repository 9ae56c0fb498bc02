"""Nested-entanglement trees.

A tree over ``n`` qubits stores one ``(theta, phi)`` pair per interior node.
Node ``(level j, position i)`` lives at flat index ``2**j - 1 + i``; its
children are ``(j + 1, 2i)`` (qubit ``j`` up) and ``(j + 1, 2i + 1)`` (qubit
``j`` down). The node coefficients are

    alpha = cos(theta/2) exp(-i phi/2),   beta = sin(theta/2) exp(+i phi/2)

and the node unitary is ``Rz(phi) Ry(theta)``, whose first column is
``(alpha, beta)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .circuit import ry_matrix, rz_matrix
from .errors import IndexOutOfRange, NotNormalized, NoValidPath
from .state import EPS_ZERO, TargetState, as_state

_PHASE_WRAP_TOL = 1e-12


def node_index(level: int, pos: int) -> int:
    return (1 << level) - 1 + pos


def node_unitary(theta: float, phi: float) -> np.ndarray:
    return rz_matrix(phi) @ ry_matrix(theta)


@dataclass(frozen=True)
class PsiNode:
    theta: float
    phi: float
    dead: bool = False

    @property
    def alpha(self) -> complex:
        return math.cos(self.theta / 2) * np.exp(-0.5j * self.phi)

    @property
    def beta(self) -> complex:
        return math.sin(self.theta / 2) * np.exp(0.5j * self.phi)

    def unitary(self) -> np.ndarray:
        return node_unitary(self.theta, self.phi)


@dataclass(frozen=True)
class PsiTree:
    n: int
    theta: np.ndarray
    phi: np.ndarray
    dead: np.ndarray
    global_phase: float = 0.0

    def __post_init__(self):
        size = 2**self.n - 1
        for name, dtype in (("theta", float), ("phi", float), ("dead", bool)):
            a = np.array(getattr(self, name), dtype=dtype).reshape(-1)
            if a.size != size:
                raise ValueError(f"{name} must have 2^n - 1 = {size} entries, got {a.size}")
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        object.__setattr__(self, "global_phase", float(self.global_phase))

    @classmethod
    def from_angles(cls, n, theta, phi, dead=None, global_phase=0.0) -> "PsiTree":
        if dead is None:
            dead = np.zeros(2**n - 1, dtype=bool)
        return cls(n, theta, phi, dead, global_phase)

    @property
    def size(self) -> int:
        return 2**self.n - 1

    def _check(self, level, pos):
        if not (0 <= level < self.n and 0 <= pos < 2**level):
            raise IndexOutOfRange(f"node ({level}, {pos}) outside a {self.n}-qubit tree")

    def node(self, level: int, pos: int) -> PsiNode:
        self._check(level, pos)
        k = node_index(level, pos)
        return PsiNode(float(self.theta[k]), float(self.phi[k]), bool(self.dead[k]))

    def level_slice(self, level: int) -> slice:
        return slice(node_index(level, 0), node_index(level + 1, 0))

    def alphas(self) -> np.ndarray:
        return np.cos(self.theta / 2) * np.exp(-0.5j * self.phi)

    def betas(self) -> np.ndarray:
        return np.sin(self.theta / 2) * np.exp(0.5j * self.phi)

    def replace(self, theta=None, phi=None, dead=None, global_phase=None) -> "PsiTree":
        return PsiTree(
            self.n,
            self.theta if theta is None else theta,
            self.phi if phi is None else phi,
            self.dead if dead is None else dead,
            self.global_phase if global_phase is None else global_phase,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "global_phase": self.global_phase,
            "nodes": [r._asdict() for r in dump_bloch(self)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PsiTree":
        n = int(d["n"])
        theta = np.zeros(2**n - 1)
        phi = np.zeros(2**n - 1)
        dead = np.zeros(2**n - 1, dtype=bool)
        for rec in d["nodes"]:
            k = node_index(int(rec["level"]), int(rec["pos"]))
            theta[k], phi[k], dead[k] = rec["theta"], rec["phi"], rec["dead"]
        return cls(n, theta, phi, dead, d.get("global_phase", 0.0))

    @classmethod
    def from_json(cls, text: str) -> "PsiTree":
        return cls.from_dict(json.loads(text))


def _wrap(phi: np.ndarray) -> np.ndarray:
    """Map angles into (-pi, pi], snapping values within rounding of -pi to +pi."""
    out = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    out[out <= -np.pi + _PHASE_WRAP_TOL] += 2 * np.pi
    return out


def _accumulate(amps: np.ndarray, n: int, eps: float):
    """Bottom-up pass over the chi-tree.

    Returns per-level lists (index 0 = root level) of chi magnitudes, chi
    phases and, for interior levels, the node ``theta``/``phi``/``dead``.
    """
    mag = np.abs(amps)
    xi = np.where(mag > eps, np.angle(amps), 0.0)
    mags, phases, thetas, phis, deads = [mag], [xi], [], [], []
    for _ in range(n):
        mL, mR = mag[0::2], mag[1::2]
        xL, xR = xi[0::2].copy(), xi[1::2].copy()
        zl, zr = mL <= eps, mR <= eps
        xL[zl] = xR[zl]
        xR[zr] = xL[zr]
        both = zl & zr
        xL[both] = 0.0
        phi = np.where(both, 0.0, _wrap(xR - xL))
        thetas.append(np.where(both, 0.0, 2 * np.arctan2(mR, mL)))
        phis.append(phi)
        deads.append(both)
        mag = np.hypot(mL, mR)
        xi = xL + phi / 2
        mags.append(mag)
        phases.append(xi)
    return mags[::-1], phases[::-1], thetas[::-1], phis[::-1], deads[::-1]


def chi_levels(state, eps: float = EPS_ZERO):
    """Accumulated chi magnitudes and phases, one array per level ``0..n``
    (level ``n`` holds the leaf amplitudes)."""
    state = as_state(state)
    mags, phases, *_ = _accumulate(state.amplitudes, state.n, eps)
    return mags, phases


def build_tree(state, eps: float = EPS_ZERO) -> PsiTree:
    """Tree parameters for a normalized state, accumulated bottom-up.

    Each parent combines its children's accumulated overlaps
    ``chi = |chi| e^{i xi}``: ``theta = 2 atan2(|chi_R|, |chi_L|)``,
    ``phi = xi_R - xi_L`` and ``xi_parent = (xi_L + xi_R) / 2``. The phase of a
    zero-magnitude child is taken from its sibling, and ``phi`` is wrapped into
    ``(-pi, pi]`` (the matching multiple of ``2 pi`` is absorbed by the right
    child's phase, which leaves the represented state unchanged). A node whose
    children are both zero is dead and gets ``theta = phi = 0``.

    The root phase is stored as ``global_phase``:
    ``tree_to_state(tree) * exp(1j * global_phase) == state``.
    """
    state = as_state(state)
    nrm = state.norm()
    if abs(nrm - 1.0) > 1e-8:
        raise NotNormalized(f"state norm is {nrm!r}, expected 1")
    mags, phases, thetas, phis, deads = _accumulate(state.amplitudes, state.n, eps)
    return PsiTree(
        state.n,
        np.concatenate(thetas),
        np.concatenate(phis),
        np.concatenate(deads),
        float(phases[0][0]),
    )


def tree_to_state(tree: PsiTree) -> TargetState:
    """Amplitudes as products of alpha (left turns) and beta (right turns).

    Dead subtrees contribute exact zeros, whatever angles they carry.
    """
    alpha, beta = tree.alphas(), tree.betas()
    amps = np.ones(1, dtype=complex)
    for j in range(tree.n):
        sl = tree.level_slice(j)
        amps = np.where(tree.dead[sl], 0.0, amps)
        nxt = np.empty(2 * amps.size, dtype=complex)
        nxt[0::2] = amps * alpha[sl]
        nxt[1::2] = amps * beta[sl]
        amps = nxt
    return TargetState(tree.n, amps)


def subtree_norms(tree: PsiTree) -> np.ndarray:
    """Weight of every node: the product of |alpha|^2 / |beta|^2 along its path."""
    w = np.ones(tree.size)
    ca, cb = np.cos(tree.theta / 2) ** 2, np.sin(tree.theta / 2) ** 2
    for j in range(1, tree.n):
        parent = tree.level_slice(j - 1)
        sl = tree.level_slice(j)
        w[sl][0::2] = w[parent] * ca[parent]
        w[sl][1::2] = w[parent] * cb[parent]
    return w


def _leftmost_live(tree: PsiTree, level: int) -> int:
    sl = tree.level_slice(level)
    live = np.flatnonzero(~tree.dead[sl])
    if live.size == 0:
        raise NoValidPath(f"every node on level {level} is dead")
    return int(live[0])


def fill_dead(tree: PsiTree) -> PsiTree:
    """Give each dead node the angles of the leftmost live node of its level.

    The represented state does not change.
    """
    theta, phi = tree.theta.copy(), tree.phi.copy()
    for j in range(tree.n):
        sl = tree.level_slice(j)
        if not tree.dead[sl].any():
            continue
        ref = node_index(j, _leftmost_live(tree, j))
        idx = np.flatnonzero(tree.dead[sl]) + sl.start
        theta[idx] = theta[ref]
        phi[idx] = phi[ref]
    return tree.replace(theta=theta, phi=phi)


def flip_level(tree: PsiTree, level: int) -> PsiTree:
    """Relabel qubit ``level`` (up <-> down) without changing anything else.

    Nodes on ``level`` map ``(theta, phi) -> (pi - theta, -phi)`` so that the
    new alpha/beta are the old beta/alpha, and every deeper level has the
    subtrees below each ``level`` node exchanged. The resulting state is
    ``X_level`` applied to the old one, exactly.
    """
    theta, phi, dead = tree.theta.copy(), tree.phi.copy(), tree.dead.copy()
    sl = tree.level_slice(level)
    live = ~dead[sl]
    theta[sl] = np.where(live, np.pi - theta[sl], theta[sl])
    phi[sl] = np.where(live, -phi[sl], phi[sl])
    for l in range(level + 1, tree.n):
        sl = tree.level_slice(l)
        perm = np.arange(2**l) ^ (1 << (l - 1 - level))
        theta[sl] = theta[sl][perm]
        phi[sl] = phi[sl][perm]
        dead[sl] = dead[sl][perm]
    return tree.replace(theta=theta, phi=phi, dead=dead)


def canonicalize(tree: PsiTree, eps: float = EPS_ZERO):
    """Canonical form of ``tree`` and the qubit flips used to reach it.

    The leaf of largest magnitude (smallest index on ties) is moved onto the
    leftmost branch by relabeling every qubit where its path turns right;
    bit ``q`` of the returned mask marks a relabeled qubit ``q``. Dead nodes
    then copy the leftmost node of their level. Applying X to the masked
    qubits of ``tree_to_state(canonical)`` gives back ``tree_to_state(tree)``.
    """
    amps = np.abs(tree_to_state(tree).amplitudes)
    k = int(np.argmax(amps))
    if amps[k] <= eps:
        raise NoValidPath("no leaf has nonzero amplitude")
    n = tree.n
    mask = 0
    out = tree
    for q in range(n):
        if (k >> (n - 1 - q)) & 1:
            out = flip_level(out, q)
            mask |= 1 << q
    return fill_dead(out), mask


class BlochRecord(NamedTuple):
    level: int
    pos: int
    theta: float
    phi: float
    dead: bool


def dump_bloch(tree: PsiTree) -> list:
    """Per-node Bloch angles in level order."""
    out = []
    for j in range(tree.n):
        for i in range(2**j):
            k = node_index(j, i)
            out.append(BlochRecord(j, i, float(tree.theta[k]), float(tree.phi[k]), bool(tree.dead[k])))
    return out


def format_bloch_table(tree: PsiTree) -> str:
    lines = [f"{'level':>5} {'pos':>5} {'theta':>20} {'phi':>20} {'dead':>5}"]
    for r in dump_bloch(tree):
        lines.append(f"{r.level:>5} {r.pos:>5} {r.theta:>20.12g} {r.phi:>20.12g} {str(r.dead).lower():>5}")
    lines.append(f"global_phase {tree.global_phase:.12g}")
    return "\n".join(lines) + "\n"


def subtree(tree: PsiTree, level: int, pos: int) -> PsiTree:
    """The tree rooted at ``(level, pos)`` as a tree over qubits ``level..n-1``."""
    tree._check(level, pos)
    m = tree.n - level
    parts = {name: [] for name in ("theta", "phi", "dead")}
    for l in range(m):
        start = node_index(level + l, pos << l)
        for name in parts:
            parts[name].append(getattr(tree, name)[start : start + (1 << l)])
    return PsiTree(m, *(np.concatenate(parts[k]) for k in ("theta", "phi", "dead")), 0.0)
