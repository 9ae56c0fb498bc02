"""Tree compression and local-basis normal forms.

* ``prune`` merges the two child subtrees of a node when they are nearly
  parallel, at a fidelity cost fixed by the node's reduced density matrix.
* ``rearrange_branches`` swaps a node's children and returns the controlled X
  that undoes the swap.
* ``schmidt_2q`` writes a two-qubit state as one Ry and one CNOT between local
  basis changes.
* ``solve_generalized_schmidt`` finds per-qubit basis changes that zero every
  single-spin-flip amplitude of an m-qubit state.

Local basis maps are ``W = [[alpha, -conj(beta)], [beta, conj(alpha)]]``,
which equals ``Rz(chi) Ry(theta) Rz(-phi)``; the transformed ("hatted")
amplitudes are ``(W_0 (x) ... (x) W_{m-1}) gamma``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares

from .circuit import DOWN, UP, Circuit, apply_circuit, cnot, ry, unitary, x
from .errors import (
    ConvergenceFailure,
    DeadSubtree,
    DimensionMismatch,
    IndexOutOfRange,
    LevelMismatch,
    NotAdjacent,
    PhaseFixDegenerate,
    ToleranceExceeded,
)
from .state import EPS_ZERO, TargetState, require_normalized
from .tree import PsiTree, node_index, subtree, tree_to_state


def _path_controls(level: int, pos: int) -> tuple:
    return tuple((q, DOWN if (pos >> (level - 1 - q)) & 1 else UP) for q in range(level))


def _descendant_blocks(level: int, pos: int, n: int):
    """Flat index ranges of the subtree under ``(level, pos)``, one per depth."""
    for l in range(level, n):
        width = 1 << (l - level)
        start = node_index(l, pos * width)
        yield start, start + width


# --------------------------------------------------------------------------
# overlaps and pruning


def subtree_state(tree: PsiTree, level: int, pos: int) -> TargetState:
    return tree_to_state(subtree(tree, level, pos))


def subtree_overlap(tree: PsiTree, node_a: tuple, node_b: tuple) -> complex:
    """``<Psi_a|Psi_b>`` of two same-level subtrees."""
    (ja, ia), (jb, ib) = node_a, node_b
    if ja != jb:
        raise LevelMismatch(f"nodes on levels {ja} and {jb}")
    tree._check(ja, ia)
    tree._check(jb, ib)
    for j, i in (node_a, node_b):
        if tree.dead[node_index(j, i)]:
            raise DeadSubtree(f"subtree at ({j}, {i}) is dead")
    a = subtree_state(tree, ja, ia).amplitudes
    b = subtree_state(tree, jb, ib).amplitudes
    return complex(np.vdot(a, b))


def schmidt_weights(alpha: complex, beta: complex, kappa: complex) -> tuple:
    """Roots ``(lambda_plus, lambda_minus)`` of ``l^2 - l + |a|^2 |b|^2 (1 - |k|^2)``."""
    c = abs(alpha) ** 2 * abs(beta) ** 2 * max(0.0, 1.0 - abs(kappa) ** 2)
    root = math.sqrt(max(0.0, 1.0 - 4.0 * c))
    return (1.0 + root) / 2.0, (1.0 - root) / 2.0


@dataclass(frozen=True)
class PruneAnalysis:
    """Result of merging the two children of ``node``.

    ``rotation`` is the (path-controlled) single-qubit gate that maps the
    pruned tree back into the original frame. ``fidelity`` is the predicted
    fidelity of the whole pruned state against the original.
    """

    node: tuple
    kappa: complex
    alpha: complex
    beta: complex
    lambda_plus: float
    lambda_minus: float
    branch_fidelity: float
    fidelity: float
    rotation: Circuit

    def to_dict(self) -> dict:
        return {
            "node": list(self.node),
            "kappa": [self.kappa.real, self.kappa.imag],
            "alpha": [self.alpha.real, self.alpha.imag],
            "beta": [self.beta.real, self.beta.imag],
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "branch_fidelity": self.branch_fidelity,
            "fidelity": self.fidelity,
        }


def _branch_weight(tree: PsiTree, level: int, pos: int) -> float:
    """Squared amplitude of the path leading to ``(level, pos)``."""
    w = 1.0
    for l in range(level):
        p = pos >> (level - l)
        k = node_index(l, p)
        bit = (pos >> (level - 1 - l)) & 1
        w *= math.sin(tree.theta[k] / 2) ** 2 if bit else math.cos(tree.theta[k] / 2) ** 2
    return w


def prune(tree: PsiTree, node: tuple, tolerance: float) -> tuple:
    """Merge the two children of ``node`` into its up child.

    Near the node the state is ``alpha|0>Psi1 + beta|1>Psi2`` with
    ``kappa = <Psi1|Psi2>``. The node qubit's reduced density matrix has
    eigenvalues ``lambda_plus >= lambda_minus`` and leading eigenvector
    ``v_plus``. The pruned tree keeps ``|0> Psi1`` at the node (down branch
    dead); the returned rotation sends ``|0>`` to ``v_plus`` with the phase
    that maximizes the overlap. The branch fidelity is
    ``|<v_plus|(alpha, beta kappa)>|^2``, which is ``lambda_plus^2`` when
    ``|alpha| = |beta|``.
    """
    j, i = node
    tree._check(j, i)
    n = tree.n
    if j >= n - 1:
        raise IndexOutOfRange(f"node ({j}, {i}) has no child subtrees")
    if tree.dead[node_index(j, i)]:
        raise DeadSubtree(f"node ({j}, {i}) is dead")
    kappa = subtree_overlap(tree, (j + 1, 2 * i), (j + 1, 2 * i + 1))
    if 1.0 - abs(kappa) > tolerance:
        raise ToleranceExceeded(f"1 - |kappa| = {1.0 - abs(kappa)!r} exceeds tolerance {tolerance!r}")
    k = node_index(j, i)
    alpha = complex(tree.alphas()[k])
    beta = complex(tree.betas()[k])
    lam_p, lam_m = schmidt_weights(alpha, beta, kappa)

    rho = np.array(
        [[abs(alpha) ** 2, alpha * np.conj(beta) * np.conj(kappa)], [np.conj(alpha) * beta * kappa, abs(beta) ** 2]]
    )
    _, vecs = np.linalg.eigh(rho)
    v_plus, v_minus = vecs[:, 1], vecs[:, 0]
    proj = complex(np.vdot(v_plus, [alpha, beta * kappa]))
    branch_fid = abs(proj) ** 2
    eta = np.angle(proj) if abs(proj) > EPS_ZERO else 0.0
    rot = np.column_stack([np.exp(1j * eta) * v_plus, v_minus])
    rotation = Circuit(n, (unitary(j, rot, _path_controls(j, i), label=f"V[{j},{i}]"),))

    theta, phi, dead = tree.theta.copy(), tree.phi.copy(), tree.dead.copy()
    theta[k], phi[k] = 0.0, 0.0
    for start, stop in _descendant_blocks(j + 1, 2 * i + 1, n):
        theta[start:stop], phi[start:stop], dead[start:stop] = 0.0, 0.0, True
    pruned = tree.replace(theta=theta, phi=phi, dead=dead)

    w = _branch_weight(tree, j, i)
    fid = ((1.0 - w) + w * math.sqrt(branch_fid)) ** 2
    analysis = PruneAnalysis((j, i), kappa, alpha, beta, lam_p, lam_m, branch_fid, fid, rotation)
    return pruned, analysis


def pruned_state(pruned: PsiTree, analysis: PruneAnalysis) -> TargetState:
    """The pruned approximation expressed in the original frame."""
    return apply_circuit(analysis.rotation, tree_to_state(pruned))


def prune_pair(tree: PsiTree, node_a: tuple, node_b: tuple, tolerance: float) -> tuple:
    """Prune two same-level subtrees; they must be the two children of one node."""
    (ja, ia), (jb, ib) = sorted([tuple(node_a), tuple(node_b)])
    if ja != jb:
        raise LevelMismatch(f"nodes on levels {ja} and {jb}")
    if ja == 0 or ia // 2 != ib // 2 or ia == ib:
        raise NotAdjacent(f"({ja}, {ia}) and ({jb}, {ib}) are not siblings; rearrange branches first")
    return prune(tree, (ja - 1, ia // 2), tolerance)


def best_prune_node(tree: PsiTree):
    """Live node whose children overlap the most, or None if there is none."""
    best, best_mag = None, -1.0
    for j in range(tree.n - 1):
        for i in range(1 << j):
            kids = (node_index(j + 1, 2 * i), node_index(j + 1, 2 * i + 1))
            if tree.dead[node_index(j, i)] or tree.dead[kids[0]] or tree.dead[kids[1]]:
                continue
            mag = abs(subtree_overlap(tree, (j + 1, 2 * i), (j + 1, 2 * i + 1)))
            if mag > best_mag + 1e-15:
                best, best_mag = (j, i), mag
    return best


def rearrange_branches(tree: PsiTree, node: tuple) -> tuple:
    """Swap the children of ``node``.

    The node maps ``(theta, phi) -> (pi - theta, -phi)`` so that its alpha and
    beta trade places along with the subtrees. Applying the returned
    path-controlled X to the new state gives the old state back exactly.
    """
    j, i = node
    tree._check(j, i)
    k = node_index(j, i)
    if tree.dead[k]:
        raise DeadSubtree(f"node ({j}, {i}) is dead")
    theta, phi, dead = tree.theta.copy(), tree.phi.copy(), tree.dead.copy()
    theta[k], phi[k] = math.pi - theta[k], -phi[k]
    for arr in (theta, phi, dead):
        for (s0, e0), (s1, e1) in zip(
            _descendant_blocks(j + 1, 2 * i, tree.n), _descendant_blocks(j + 1, 2 * i + 1, tree.n)
        ):
            arr[s0:e0], arr[s1:e1] = arr[s1:e1].copy(), arr[s0:e0].copy()
    gate = Circuit(tree.n, (x(j, _path_controls(j, i)),))
    return tree.replace(theta=theta, phi=phi, dead=dead), gate


# --------------------------------------------------------------------------
# local basis transforms


@dataclass(frozen=True)
class LocalBasisTransform:
    """Per-qubit maps ``W_i = Rz(chi_i) Ry(theta_i) Rz(-phi_i)`` and a global phase."""

    theta: tuple
    phi: tuple
    chi: tuple
    global_phase: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "chi"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not len(self.theta) == len(self.phi) == len(self.chi):
            raise DimensionMismatch("theta, phi and chi must have one entry per qubit")
        object.__setattr__(self, "global_phase", float(self.global_phase))

    @classmethod
    def identity(cls, m: int) -> "LocalBasisTransform":
        return cls((0.0,) * m, (0.0,) * m, (0.0,) * m)

    @classmethod
    def from_matrices(cls, mats, global_phase: float = 0.0) -> "LocalBasisTransform":
        """Parameters of SU(2) matrices; any U(2) determinant phase goes into the global phase."""
        th, ph, ch = [], [], []
        extra = 0.0
        for w in mats:
            w = np.asarray(w, dtype=complex)
            delta = np.angle(np.linalg.det(w)) / 2
            w = w * np.exp(-1j * delta)
            extra += delta
            a, b = w[0, 0], w[1, 0]
            arg_a = np.angle(a) if abs(a) > EPS_ZERO else 0.0
            arg_b = np.angle(b) if abs(b) > EPS_ZERO else 0.0
            th.append(2 * math.atan2(abs(b), abs(a)))
            ph.append(arg_a + arg_b)
            ch.append(arg_b - arg_a)
        return cls(tuple(th), tuple(ph), tuple(ch), global_phase + extra)

    @property
    def m(self) -> int:
        return len(self.theta)

    def alphas(self) -> np.ndarray:
        t, p, c = (np.array(v) for v in (self.theta, self.phi, self.chi))
        return np.cos(t / 2) * np.exp(0.5j * (p - c))

    def betas(self) -> np.ndarray:
        t, p, c = (np.array(v) for v in (self.theta, self.phi, self.chi))
        return np.sin(t / 2) * np.exp(0.5j * (p + c))

    def matrices(self) -> list:
        return [np.array([[a, -np.conj(b)], [b, np.conj(a)]]) for a, b in zip(self.alphas(), self.betas())]

    def operator(self) -> np.ndarray:
        out = np.exp(1j * self.global_phase) * np.ones((1, 1), dtype=complex)
        for w in self.matrices():
            out = np.kron(out, w)
        return out

    def apply(self, state) -> TargetState:
        """Hatted amplitudes ``e^{i global_phase} (W_0 (x) ...) gamma``."""
        amps = np.asarray(state, dtype=complex).reshape(-1)
        if amps.size != 1 << self.m:
            raise DimensionMismatch(f"expected {1 << self.m} amplitudes, got {amps.size}")
        return TargetState(self.m, _apply_local(self.matrices(), amps) * np.exp(1j * self.global_phase))

    def invert(self, state) -> TargetState:
        amps = np.asarray(state, dtype=complex).reshape(-1)
        mats = [w.conj().T for w in self.matrices()]
        return TargetState(self.m, _apply_local(mats, amps) * np.exp(-1j * self.global_phase))

    def to_dict(self) -> dict:
        return {
            "theta": list(self.theta),
            "phi": list(self.phi),
            "chi": list(self.chi),
            "global_phase": self.global_phase,
        }


def _apply_local(mats, amps: np.ndarray) -> np.ndarray:
    m = len(mats)
    psi = amps.reshape((2,) * m)
    for q, w in enumerate(mats):
        psi = np.moveaxis(np.tensordot(w, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


# --------------------------------------------------------------------------
# two-qubit Schmidt form


class SchmidtCircuit(NamedTuple):
    theta: float
    transform: LocalBasisTransform
    circuit: Circuit


def schmidt_2q(state) -> SchmidtCircuit:
    """Two-qubit state as ``Ry(theta)`` on qubit 0 followed by one CNOT.

    ``theta = 2 atan2(lambda_minus, lambda_plus)`` with the singular values
    of the 2x2 amplitude matrix, so ``theta`` lies in ``[0, pi/2]``. The
    returned transform maps the input onto
    ``cos(theta/2)|00> + sin(theta/2)|11>``, which is the circuit's output on
    ``|00>``.
    """
    amps = np.asarray(state, dtype=complex).reshape(-1)
    if amps.size != 4:
        raise DimensionMismatch(f"schmidt_2q needs a 2-qubit state, got {amps.size} amplitudes")
    state = require_normalized(TargetState(2, amps))
    u, s, vh = np.linalg.svd(state.amplitudes.reshape(2, 2))
    theta = 2 * math.atan2(s[1], s[0])
    # input = U (x) Vh^T applied to sum_r s_r |rr>
    transform = LocalBasisTransform.from_matrices([u.conj().T, vh.conj()])
    circuit = Circuit(2, (ry(0, theta), cnot(0, 1)))
    return SchmidtCircuit(theta, transform, circuit)


# --------------------------------------------------------------------------
# generalized Schmidt form


@dataclass(frozen=True)
class MultilinearSystem:
    """Single-flip amplitudes of the transformed state as multilinear forms.

    Equation ``k`` describes ``gamma_hat[2^k]`` (the single flip on basis bit
    ``k``, i.e. qubit ``m - 1 - k``). ``coefficients[k][s]`` is
    ``gamma[2^k ^ s]``: the amplitude that reaches the reference basis state
    through the flip set ``s``. Grouped by ``popcount(s)`` these are the
    coefficients of the constant, linear, quadratic, ... terms in the ratios
    ``z_i = -conj(beta_i) / alpha_i`` (and ``-conj(z_k)`` for the equation's
    own qubit).
    """

    m: int
    coefficients: np.ndarray

    def reference(self, k: int) -> int:
        return 1 << k

    def by_order(self, k: int) -> dict:
        """``{s: {flip_set: coefficient}}`` for equation ``k``."""
        out = {}
        for mask, c in enumerate(self.coefficients[k]):
            out.setdefault(bin(mask).count("1"), {})[mask] = complex(c)
        return out

    def _factors(self, transform: LocalBasisTransform, k: int):
        """Per-bit (unflipped, flipped) factors for equation ``k``, bit 0 first."""
        a, b = transform.alphas(), transform.betas()
        out = []
        for bit in range(self.m):
            q = self.m - 1 - bit
            if bit == k:
                out.append((np.conj(a[q]), b[q]))
            else:
                out.append((a[q], -np.conj(b[q])))
        return out

    def _weights(self, factors) -> np.ndarray:
        w = np.ones(1, dtype=complex)
        for unflipped, flipped in reversed(factors):  # highest bit first to match index order
            w = np.kron(w, [unflipped, flipped])
        return w

    def evaluate(self, transform: LocalBasisTransform) -> np.ndarray:
        """``gamma_hat[2^k]`` for every ``k`` (without the transform's global phase)."""
        return np.array(
            [self.coefficients[k] @ self._weights(self._factors(transform, k)) for k in range(self.m)]
        )

    def divisor(self, transform: LocalBasisTransform, k: int) -> complex:
        """``conj(alpha_k) prod_{i != k} alpha_i`` for equation ``k``."""
        return complex(np.prod([f[0] for f in self._factors(transform, k)]))

    def evaluate_divided(self, transform: LocalBasisTransform) -> np.ndarray:
        """The equations in ratio form; undefined when some alpha vanishes."""
        vals = self.evaluate(transform)
        return np.array([vals[k] / self.divisor(transform, k) for k in range(self.m)])

    def evaluate_ratios(self, z) -> np.ndarray:
        """Ratio form as a polynomial in ``z`` (indexed by qubit)."""
        z = np.asarray(z, dtype=complex)
        out = []
        for k in range(self.m):
            factors = []
            for bit in range(self.m):
                q = self.m - 1 - bit
                factors.append((1.0, -np.conj(z[q]) if bit == k else z[q]))
            out.append(self.coefficients[k] @ self._weights(factors))
        return np.array(out)


def build_multilinear_system(state) -> MultilinearSystem:
    state = require_normalized(state)
    m = state.n
    if m < 2:
        raise ValueError("the multilinear system needs at least two qubits")
    idx = np.arange(1 << m)
    coeffs = np.array([state.amplitudes[(1 << k) ^ idx] for k in range(m)])
    return MultilinearSystem(m, coeffs)


class GeneralizedSchmidt(NamedTuple):
    transform: LocalBasisTransform
    state: TargetState


def _product_fit(amps: np.ndarray, m: int, iters: int = 200) -> list:
    """Alternating fit of the closest product state; returns one 2-vector per qubit."""
    psi = amps.reshape((2,) * m)
    k = int(np.argmax(np.abs(amps)))
    vecs = [np.eye(2, dtype=complex)[(k >> (m - 1 - q)) & 1] for q in range(m)]
    for _ in range(iters):
        prev = [v.copy() for v in vecs]
        for q in range(m):
            t = psi
            for r in reversed(range(m)):
                if r != q:
                    t = np.tensordot(t, vecs[r].conj(), axes=([r], [0]))
            nrm = np.linalg.norm(t)
            if nrm > EPS_ZERO:
                vecs[q] = t / nrm
        if max(np.abs(abs(np.vdot(a, b)) - 1) for a, b in zip(prev, vecs)) < 1e-15:
            break
    return vecs


def _angles_mapping_to_zero(vecs) -> np.ndarray:
    """(theta, phi) per qubit, chi = 0, with W|v> proportional to |0>."""
    th = [2 * math.atan2(abs(v[1]), abs(v[0])) for v in vecs]
    ph = [np.angle(-v[1]) - np.angle(v[0]) if abs(v[1]) > EPS_ZERO else 0.0 for v in vecs]
    return np.array(th + ph)


def _phase_fix(hat: np.ndarray, m: int, eps: float):
    """Chi per qubit and a global phase making the reference amplitudes real non-negative.

    Rz(chi) on qubit q multiplies amplitudes with that qubit at 0 by
    ``e^{-i chi/2}`` and at 1 by ``e^{+i chi/2}``.
    """
    full = (1 << m) - 1

    def arg(i):
        if abs(hat[i]) <= eps:
            warnings.warn(
                f"amplitude {i} is below the zero threshold; its phase is left unfixed",
                PhaseFixDegenerate,
                stacklevel=3,
            )
            return 0.0
        return float(np.angle(hat[i]))

    a0 = arg(0)
    if m == 2:
        # partners of the single flips are single flips; fix |00> and |11> instead
        a3 = arg(full)
        t = (a0 - a3) / 2
        return np.array([t, t]), -(a0 + a3) / 2
    # the partner of the flip on qubit q differs from |1...1> only at qubit q
    aq = np.array([arg(full ^ (1 << (m - 1 - q))) for q in range(m)])
    s = (m * a0 - aq.sum()) / (m - 1)
    return s - a0 + aq, s / 2 - a0


def solve_generalized_schmidt(
    state, residual_tol: float = 1e-8, starts: int = 8, seed: int = 0, eps: float = EPS_ZERO
) -> GeneralizedSchmidt:
    """Local basis change zeroing every single-spin-flip amplitude.

    The ``2m`` angles ``(theta, phi)`` are found by nonlinear least squares
    on the real and imaginary parts of the ``m`` single-flip amplitudes, from
    up to ``starts`` starting points: the closest product state, the identity,
    then seeded random angles (the identity alone if it already solves the
    system). The first start whose residual
    ``sum_k |gamma_hat[2^k]|^2`` is below ``residual_tol^2`` is kept. Then
    ``chi`` and a global phase make ``gamma_hat[0]`` and the amplitudes of the
    single flips' time-reversed partners real and non-negative.
    """
    state = require_normalized(state)
    m = state.n
    if not 2 <= m <= 6:
        raise ValueError(f"solve_generalized_schmidt supports 2 to 6 qubits, got {m}")
    system = build_multilinear_system(state)
    zeros = np.zeros(m)

    def residuals(x):
        vals = system.evaluate(LocalBasisTransform(x[:m], x[m:], zeros))
        return np.concatenate([vals.real, vals.imag])

    rng = np.random.default_rng(seed)
    identity = np.zeros(2 * m)
    r0 = residuals(identity)
    if r0 @ r0 < residual_tol**2:
        candidates = [identity]
    else:
        # the closest product state is a stationary point of |gamma_hat[0]|, where
        # every single-flip amplitude vanishes; it usually needs only polishing
        candidates = [_angles_mapping_to_zero(_product_fit(state.amplitudes, m)), identity]
    while len(candidates) < starts:
        candidates.append(np.concatenate([rng.uniform(0, np.pi, m), rng.uniform(-np.pi, np.pi, m)]))

    best_x, best_res = None, math.inf
    for x0 in candidates[:starts]:
        r = residuals(x0)
        if r @ r == 0.0:
            x, res = x0, 0.0
        else:
            fit = least_squares(residuals, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
            x, res = fit.x, float(fit.fun @ fit.fun)
        if res < best_res:
            best_x, best_res = x, res
        if res < residual_tol**2:
            break
    if best_res >= residual_tol**2:
        raise ConvergenceFailure(
            f"no start reached residual {residual_tol!r} (best {math.sqrt(best_res)!r})", math.sqrt(best_res)
        )

    base = LocalBasisTransform(best_x[:m], best_x[m:], zeros)
    chi, omega = _phase_fix(base.apply(state).amplitudes, m, eps)
    transform = LocalBasisTransform(best_x[:m], best_x[m:], chi, omega)
    return GeneralizedSchmidt(transform, transform.apply(state))


def single_flip_amplitudes(state) -> np.ndarray:
    """``gamma[2^k]`` for each bit ``k``."""
    amps = np.asarray(state, dtype=complex).reshape(-1)
    m = int(round(math.log2(amps.size)))
    return amps[[1 << k for k in range(m)]]


def partner_amplitudes(state) -> np.ndarray:
    """Amplitudes of ``|1...1> ^ 2^k`` for each bit ``k``."""
    amps = np.asarray(state, dtype=complex).reshape(-1)
    m = int(round(math.log2(amps.size)))
    full = (1 << m) - 1
    return amps[[full ^ (1 << k) for k in range(m)]]

