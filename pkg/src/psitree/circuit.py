"""Gate-level circuit representation, reference simulator and exporters.

Gate lists are in temporal order: the first gate acts first on the input
state. An operator product written right-to-left therefore has to be reversed
when it is emitted as a circuit.

A control is a ``(qubit, polarity)`` pair. Polarity ``"down"`` fires on
``|1>`` (the usual control); ``"up"`` fires on ``|0>``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TooLarge, UnloweredGate
from .state import TargetState, as_state

FORMAT_VERSION = 1
UP, DOWN = "up", "down"

KINDS = (
    "RotY",
    "RotZ",
    "PhaseShift",
    "PauliX",
    "PauliZ",
    "Hadamard",
    "GlobalPhase",
    "Swap",
    "Unitary2x2",
)
_N_PARAMS = {
    "RotY": 1,
    "RotZ": 1,
    "PhaseShift": 1,
    "PauliX": 0,
    "PauliZ": 0,
    "Hadamard": 0,
    "GlobalPhase": 1,
    "Swap": 1,
    "Unitary2x2": 8,
}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(phi: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * phi), 0], [0, np.exp(0.5j * phi)]], dtype=complex)


def phase_matrix(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit.

    ``params`` holds the angle for rotations and phases, the second qubit for
    ``Swap``, and the row-major ``(re, im)`` pairs of the matrix for
    ``Unitary2x2``. ``label`` is free-form metadata (e.g. which tree nodes a
    gate was built from) and does not take part in equality.
    """

    kind: str
    target: int
    params: tuple = ()
    controls: tuple = ()
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _N_PARAMS[self.kind]:
            raise ValueError(f"{self.kind} takes {_N_PARAMS[self.kind]} params, got {len(params)}")
        controls = tuple((int(q), str(p)) for q, p in self.controls)
        qubits = [q for q, _ in controls]
        for _, pol in controls:
            if pol not in (UP, DOWN):
                raise ValueError(f"bad control polarity {pol!r}")
        if len(set(qubits)) != len(qubits):
            raise ValueError("control qubits must be distinct")
        if self.target in qubits:
            raise ValueError("target qubit cannot also be a control")
        if self.kind == "Swap" and int(params[0]) in qubits + [self.target]:
            raise ValueError("swap qubits must be distinct from each other and the controls")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "controls", controls)
        if self.kind == "Unitary2x2":
            m = self.matrix()
            if not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-10):
                raise ValueError("Unitary2x2 matrix is not unitary")

    @property
    def qubits(self) -> tuple:
        extra = (int(self.params[0]),) if self.kind == "Swap" else ()
        return (self.target,) + extra + tuple(q for q, _ in self.controls)

    def matrix(self) -> np.ndarray:
        """2x2 matrix acting on the target (not defined for ``Swap``)."""
        k, p = self.kind, self.params
        if k == "RotY":
            return ry_matrix(p[0])
        if k == "RotZ":
            return rz_matrix(p[0])
        if k == "PhaseShift":
            return phase_matrix(p[0])
        if k == "PauliX":
            return X_MATRIX
        if k == "PauliZ":
            return Z_MATRIX
        if k == "Hadamard":
            return H_MATRIX
        if k == "GlobalPhase":
            return np.exp(1j * p[0]) * np.eye(2, dtype=complex)
        if k == "Unitary2x2":
            v = np.array(p).reshape(4, 2)
            return (v[:, 0] + 1j * v[:, 1]).reshape(2, 2)
        raise ValueError("Swap has no 2x2 matrix")

    def is_cnot(self) -> bool:
        return self.kind == "PauliX" and len(self.controls) == 1 and self.controls[0][1] == DOWN

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "params": list(self.params),
            "target": self.target,
            "controls": [[q, p] for q, p in self.controls],
        }
        if self.label is not None:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(
            d["kind"],
            int(d["target"]),
            tuple(d.get("params", ())),
            tuple((q, p) for q, p in d.get("controls", ())),
            d.get("label"),
        )


def _ctrl(controls) -> tuple:
    return tuple((q, p) for q, p in controls)


def ry(target, theta, controls=(), label=None):
    return Gate("RotY", target, (theta,), _ctrl(controls), label)


def rz(target, phi, controls=(), label=None):
    return Gate("RotZ", target, (phi,), _ctrl(controls), label)


def phase(target, phi, controls=(), label=None):
    return Gate("PhaseShift", target, (phi,), _ctrl(controls), label)


def x(target, controls=(), label=None):
    return Gate("PauliX", target, (), _ctrl(controls), label)


def z(target, controls=(), label=None):
    return Gate("PauliZ", target, (), _ctrl(controls), label)


def h(target, controls=(), label=None):
    return Gate("Hadamard", target, (), _ctrl(controls), label)


def cnot(control, target, label=None):
    return Gate("PauliX", target, (), ((control, DOWN),), label)


def swap(q1, q2, controls=(), label=None):
    return Gate("Swap", q1, (q2,), _ctrl(controls), label)


def global_phase(xi, label=None):
    return Gate("GlobalPhase", 0, (xi,), (), label)


def unitary(target, matrix, controls=(), label=None):
    m = np.asarray(matrix, dtype=complex).reshape(4)
    params = tuple(v for c in m for v in (c.real, c.imag))
    return Gate("Unitary2x2", target, params, _ctrl(controls), label)


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if any(q < 0 or q >= self.n for q in g.qubits):
                raise ValueError(f"gate {g} addresses a qubit outside 0..{self.n - 1}")
        object.__setattr__(self, "gates", gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise DimensionMismatch("cannot concatenate circuits of different width")
        return Circuit(self.n, self.gates + other.gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def to_json(self) -> str:
        return json.dumps(
            {"format_version": FORMAT_VERSION, "n": self.n, "gates": [g.to_dict() for g in self.gates]}
        )

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        d = json.loads(text)
        version = d.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported circuit format_version {version}")
        return cls(int(d["n"]), tuple(Gate.from_dict(g) for g in d["gates"]))


@dataclass(frozen=True)
class GateCounts:
    """Gate tallies. ``cnot`` and ``multi_controlled`` are subsets of
    ``controlled_total``; ``single_qubit + controlled_total + swap +
    global_phase`` equals the gate-list length."""

    cnot: int = 0
    controlled_total: int = 0
    single_qubit: int = 0
    multi_controlled: int = 0
    swap: int = 0
    global_phase: int = 0


def count_gates(circuit: Circuit) -> GateCounts:
    cnot = controlled = single = multi = swaps = gphase = 0
    for g in circuit.gates:
        if g.kind == "GlobalPhase" and not g.controls:
            gphase += 1
        elif g.controls:
            controlled += 1
            multi += len(g.controls) >= 2
            cnot += g.is_cnot()
        elif g.kind == "Swap":
            swaps += 1
        else:
            single += 1
    return GateCounts(cnot, controlled, single, multi, swaps, gphase)


def census(circuit: Circuit) -> dict:
    """Counts keyed by ``(kind, number of controls)``."""
    out: dict = {}
    for g in circuit.gates:
        key = (g.kind, len(g.controls))
        out[key] = out.get(key, 0) + 1
    return out


def _apply_gate(psi: np.ndarray, g: Gate, n: int) -> None:
    """Apply ``g`` in place to ``psi`` of shape ``(2,)*n + (batch,)``."""
    base = [slice(None)] * (n + 1)
    for q, pol in g.controls:
        base[q] = 1 if pol == DOWN else 0
    if g.kind == "GlobalPhase":
        psi[tuple(base)] *= np.exp(1j * g.params[0])
        return
    t = g.target
    if g.kind == "Swap":
        u = int(g.params[0])
        i01, i10 = list(base), list(base)
        i01[t], i01[u] = 0, 1
        i10[t], i10[u] = 1, 0
        i01, i10 = tuple(i01), tuple(i10)
        tmp = psi[i01].copy()
        psi[i01] = psi[i10]
        psi[i10] = tmp
        return
    m = g.matrix()
    i0, i1 = list(base), list(base)
    i0[t], i1[t] = 0, 1
    i0, i1 = tuple(i0), tuple(i1)
    a0 = psi[i0].copy()
    a1 = psi[i1]
    if m[0, 1] == 0 and m[1, 0] == 0:
        psi[i0] = m[0, 0] * a0
        psi[i1] = m[1, 1] * a1
        return
    a1 = a1.copy()
    psi[i0] = m[0, 0] * a0 + m[0, 1] * a1
    psi[i1] = m[1, 0] * a0 + m[1, 1] * a1


def _run(circuit: Circuit, block: np.ndarray) -> np.ndarray:
    n = circuit.n
    psi = np.array(block, dtype=complex).reshape((2,) * n + (-1,))
    for g in circuit.gates:
        _apply_gate(psi, g, n)
    return psi.reshape(2**n, -1)


def apply_circuit(circuit: Circuit, state=None) -> TargetState:
    """Simulate ``circuit`` on ``state`` (default ``|0...0>``)."""
    if state is None:
        state = TargetState.basis(circuit.n, 0)
    state = as_state(state)
    if state.n != circuit.n:
        raise DimensionMismatch(f"circuit has {circuit.n} qubits, state has {state.n}")
    out = _run(circuit, state.amplitudes[:, None])[:, 0]
    return TargetState(circuit.n, out)


def circuit_unitary(circuit: Circuit, max_qubits: int = 10) -> np.ndarray:
    if circuit.n > max_qubits:
        raise TooLarge(f"refusing to build a 2^{circuit.n} square matrix (limit n={max_qubits})")
    return _run(circuit, np.eye(2**circuit.n, dtype=complex))


def expand_up_controls(circuit: Circuit) -> Circuit:
    """Rewrite every ``up`` control as an X-conjugated ``down`` control."""
    gates = []
    for g in circuit.gates:
        ups = [q for q, p in g.controls if p == UP]
        if not ups:
            gates.append(g)
            continue
        gates.extend(x(q) for q in ups)
        gates.append(Gate(g.kind, g.target, g.params, tuple((q, DOWN) for q, _ in g.controls), g.label))
        gates.extend(x(q) for q in ups)
    return Circuit(circuit.n, tuple(gates))


_QASM_SIMPLE = {"Hadamard": "h", "PauliX": "x", "PauliZ": "z", "RotY": "ry", "RotZ": "rz", "PhaseShift": "u1"}


def _fmt(v: float) -> str:
    return format(v, ".17g")


def export_qasm(circuit: Circuit) -> str:
    """OpenQASM 2.0 text for a circuit made of lowered gates only.

    One ``up`` control on an X or phase gate is emitted with an X sandwich.
    """
    body = []
    for g in circuit.gates:
        if g.kind == "GlobalPhase":
            if g.controls:
                raise UnloweredGate("controlled global phase is not lowerable")
            body.append(f"// global_phase {_fmt(g.params[0])}")
            continue
        if g.kind == "Unitary2x2":
            raise UnloweredGate("Unitary2x2 gates have no QASM 2.0 form; use the JSON export")
        if len(g.controls) > 1:
            raise UnloweredGate(f"{g.kind} with {len(g.controls)} controls is not lowerable")
        if g.kind == "Swap":
            if g.controls:
                raise UnloweredGate("controlled swap is not lowerable")
            body.append(f"swap q[{g.target}],q[{int(g.params[0])}];")
            continue
        if not g.controls:
            name = _QASM_SIMPLE[g.kind]
            arg = f"({_fmt(g.params[0])})" if g.params else ""
            body.append(f"{name}{arg} q[{g.target}];")
            continue
        (c, pol), = g.controls
        if g.kind == "PauliX":
            line = f"cx q[{c}],q[{g.target}];"
        elif g.kind == "PhaseShift":
            line = f"cu1({_fmt(g.params[0])}) q[{c}],q[{g.target}];"
        else:
            raise UnloweredGate(f"controlled {g.kind} is not in the lowered gate set")
        if pol == UP:
            body.extend([f"x q[{c}];", line, f"x q[{c}];"])
        else:
            body.append(line)
    head = [
        f"// format_version: {FORMAT_VERSION}",
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{circuit.n}];",
    ]
    return "\n".join(head + body) + "\n"
