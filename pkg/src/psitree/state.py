"""Statevector representation, normalization and overlap.

Basis index ``k`` is read as an ``n``-digit binary string with qubit 0 as the
most significant digit, so qubit ``q`` corresponds to bit ``n - 1 - q`` of ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotNormalized, ZeroVector

EPS_ZERO = 1e-12


@dataclass(frozen=True)
class TargetState:
    """Complex amplitudes of an ``n``-qubit register."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n < 1 or amps.size != 2**self.n:
            raise DimensionMismatch(
                f"expected {2**self.n if self.n >= 1 else '2^n'} amplitudes for n={self.n}, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "TargetState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size < 2 or 2**n != amps.size:
            raise DimensionMismatch(f"length {amps.size} is not a power of two >= 2")
        return cls(n, amps)

    @classmethod
    def basis(cls, n: int, k: int) -> "TargetState":
        amps = np.zeros(2**n, dtype=complex)
        amps[k] = 1.0
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return 2**self.n

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.amplitudes, dtype=dtype)


@dataclass(frozen=True)
class FidelityReport:
    overlap: complex
    fidelity: float
    global_phase: float


def as_state(state) -> TargetState:
    if isinstance(state, TargetState):
        return state
    return TargetState.from_amplitudes(state)


def normalize(state, eps: float = EPS_ZERO) -> TargetState:
    state = as_state(state)
    amps = state.amplitudes
    if np.all(np.abs(amps) <= eps):
        raise ZeroVector("cannot normalize a vector with all amplitudes below the zero threshold")
    return TargetState(state.n, amps / np.linalg.norm(amps))


def fidelity(a, b) -> FidelityReport:
    """Overlap ``<a|b>``, its squared magnitude and its phase."""
    a, b = as_state(a), as_state(b)
    if a.n != b.n:
        raise DimensionMismatch(f"qubit counts differ: {a.n} vs {b.n}")
    chi = complex(np.vdot(a.amplitudes, b.amplitudes))
    # |chi|^2 computed from the product with the conjugate keeps Phi(a,b) == Phi(b,a) bit-for-bit
    phi = (chi * chi.conjugate()).real
    return FidelityReport(overlap=chi, fidelity=float(phi), global_phase=float(np.angle(chi)))


def random_state(n: int, seed: int) -> TargetState:
    """Normalized state with i.i.d. complex Gaussian amplitudes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return TargetState(n, amps / np.linalg.norm(amps))


def product_state(qubits) -> TargetState:
    """Tensor product of single-qubit 2-vectors, qubit 0 first."""
    amps = np.ones(1, dtype=complex)
    for q in qubits:
        q = np.asarray(q, dtype=complex)
        amps = np.kron(amps, q / np.linalg.norm(q))
    return TargetState.from_amplitudes(amps)


def qubit_bit(k: int, q: int, n: int) -> int:
    """Value of qubit ``q`` in basis index ``k``."""
    return (k >> (n - 1 - q)) & 1


def apply_x_mask(state, mask: int) -> TargetState:
    """Apply Pauli-X to every qubit ``q`` with bit ``q`` set in ``mask``."""
    state = as_state(state)
    n = state.n
    index_mask = 0
    for q in range(n):
        if (mask >> q) & 1:
            index_mask |= 1 << (n - 1 - q)
    idx = np.arange(state.dim) ^ index_mask
    return TargetState(n, state.amplitudes[idx])


def require_normalized(state, tol: float = 1e-9) -> TargetState:
    """Return ``state`` as a TargetState, raising NotNormalized if its norm is off by more than ``tol``."""
    state = as_state(state)
    norm = state.norm()
    if abs(norm - 1.0) > tol:
        raise NotNormalized(f"state norm is {norm!r}, expected 1 within {tol}")
    return state
