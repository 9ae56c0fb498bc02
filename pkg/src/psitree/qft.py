"""Quantum Fourier transform from its tree description.

Every interior node of the QFT tree carries the same kind of unitary

    U_l^k = (-1)^k e^{i phi/4} Rz(phi/2) Ry(pi/2),   phi = 2 pi k / 2^l,

and the leaves carry a sign (-1)^k. A level of such nodes factors into a
Z on the previous qubit, controlled phase gates and a single Ry(pi/2), which
is how the textbook H + controlled-phase circuit falls out.

Convention: the DFT matrix is ``F[j, k] = exp(2 pi i j k / N) / sqrt(N)``
with qubit 0 the most significant bit of the basis index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import DOWN, Circuit, h, phase, ry, ry_matrix, rz_matrix, swap, unitary, z
from .errors import IndexOutOfRange, TooLarge
from .state import TargetState

MAX_QFT_QUBITS = 10


@dataclass(frozen=True)
class QftNodeParams:
    level: int
    position: int
    phi: float
    sign: int
    scalar_phase: float

    def unitary(self) -> np.ndarray:
        """``sign * e^{i phi/4} Rz(phi/2) Ry(pi/2)``."""
        scale = self.sign * np.exp(1j * self.scalar_phase)
        return scale * rz_matrix(self.phi / 2) @ ry_matrix(math.pi / 2)


def qft_node(level: int, k: int) -> QftNodeParams:
    """Closed-form parameters of node ``k`` on ``level``; ``k`` is taken mod 2^level."""
    if level < 0:
        raise IndexOutOfRange(f"level {level} is negative")
    k = k % (1 << level)
    phi = 2 * math.pi * k / (1 << level)
    return QftNodeParams(level, k, phi, -1 if k & 1 else 1, phi / 4)


def qft_params(n: int) -> dict:
    """All interior node parameters ``{(l, k): QftNodeParams}`` for ``l < n``.

    Leaf signs are not stored; ``leaf_sign`` gives them.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return {(l, k): qft_node(l, k) for l in range(n) for k in range(1 << l)}


def leaf_sign(k: int) -> int:
    return -1 if k & 1 else 1


def dft_matrix(n: int) -> np.ndarray:
    size = 1 << n
    j = np.arange(size)
    return np.exp(2j * np.pi * np.outer(j, j) / size) / math.sqrt(size)


def _rev(p: int, bits: int) -> int:
    return int(format(p, f"0{bits}b")[::-1], 2) if bits else 0


def _path(level: int, p: int) -> tuple:
    return tuple((q, DOWN if (p >> (level - 1 - q)) & 1 else "up") for q in range(level))


def qft_tree_level(n: int, l: int, digit_reversed: bool = True) -> Circuit:
    """Unfactored level ``l``: one multiply-controlled node unitary per branch.

    With ``digit_reversed`` (the form that composes into the DFT) the branch at
    path ``p`` takes its phase from ``qft_node(l, rev(p))`` while keeping the
    sign ``(-1)^p``. Without it every branch uses ``qft_node(l, p)`` verbatim.
    """
    if not 0 <= l < n:
        raise IndexOutOfRange(f"level {l} outside 0..{n - 1}")
    gates = []
    for p in range(1 << l):
        node = qft_node(l, _rev(p, l) if digit_reversed else p)
        m = node.unitary() * (node.sign * leaf_sign(p))
        gates.append(unitary(l, m, _path(l, p), label=f"U[{l},{p}]"))
    return Circuit(n, tuple(gates))


def qft_factored_level(n: int, l: int, digit_reversed: bool = True) -> Circuit:
    """Factored level ``l``: Ry(pi/2) on qubit l, controlled phases, then Z on qubit l-1.

    Control qubit ``q`` carries ``pi / 2^(l-q)`` in the digit-reversed form and
    ``pi / 2^(q+1)`` in the verbatim form.
    """
    if not 0 <= l < n:
        raise IndexOutOfRange(f"level {l} outside 0..{n - 1}")
    gates = [ry(l, math.pi / 2)]
    for q in range(l):
        angle = math.pi / 2 ** (l - q) if digit_reversed else math.pi / 2 ** (q + 1)
        gates.append(phase(l, angle, ((q, DOWN),)))
    if l > 0:
        gates.append(z(l - 1))
    return Circuit(n, tuple(gates))


def qft_tree_circuit(n: int) -> Circuit:
    """The transform assembled directly from tree levels.

    Temporal order: bit-reversal swaps, the leaf sign Z on the last qubit, then
    levels ``n-1`` down to ``0``.
    """
    gates = [swap(i, n - 1 - i) for i in range(n // 2)]
    gates.append(z(n - 1))
    for l in range(n - 1, -1, -1):
        gates += qft_tree_level(n, l).gates
    return Circuit(n, tuple(gates))


def qft_circuit(n: int, swaps: str = "trailing") -> Circuit:
    """Textbook QFT: n Hadamards, n(n-1)/2 controlled phases, floor(n/2) swaps.

    Merging each level's trailing Z with the next level's Ry(pi/2) gives a
    Hadamard. ``swaps="leading"`` is that reduction as derived (swaps first,
    levels from the last qubit up); ``"trailing"`` is its mirror image with the
    swap layer at the end.
    """
    if not 1 <= n:
        raise ValueError("n must be at least 1")
    if n > MAX_QFT_QUBITS:
        raise TooLarge(f"qft_circuit supports at most {MAX_QFT_QUBITS} qubits, got {n}")
    layer = [swap(i, n - 1 - i) for i in range(n // 2)]
    gates = []
    if swaps == "leading":
        gates += layer
        for l in range(n - 1, -1, -1):
            gates.append(h(l))
            gates += [phase(l, math.pi / 2 ** (l - q), ((q, DOWN),)) for q in range(l)]
    elif swaps == "trailing":
        for t in range(n):
            gates.append(h(t))
            gates += [phase(t, math.pi / 2 ** (c - t), ((c, DOWN),)) for c in range(t + 1, n)]
        gates += layer
    else:
        raise ValueError(f"swaps must be 'leading' or 'trailing', got {swaps!r}")
    return Circuit(n, tuple(gates))


def qft_branch_check(n: int, k: int) -> TargetState:
    """Column ``k`` of the DFT built from a single separable branch.

    The input ``|k>`` is read digit-reversed as ``|m>``; every qubit ``l`` then
    sees only the node on the path given by the first ``l`` bits of ``m``, so
    the image is a product state. The node phase on level ``l`` is
    ``qft_node(l, k).phi`` (periodicity in ``k``).
    """
    if not 1 <= n <= 8:
        raise ValueError("n must be between 1 and 8")
    if not 0 <= k < 1 << n:
        raise IndexOutOfRange(f"basis index {k} outside 0..{(1 << n) - 1}")
    m = _rev(k, n)
    sign = leaf_sign(m)
    out = np.ones(1, dtype=complex)
    for l in range(n):
        p = m >> (n - l)
        node = qft_node(l, k)
        sign *= node.sign * leaf_sign(p)
        column = node.unitary()[:, (m >> (n - 1 - l)) & 1]
        out = np.kron(out, column)
    return TargetState(n, sign * out)
