"""Statevector and circuit files.

Statevector text format: first line ``n``, then ``2^n`` lines ``re im`` in
ascending basis order (qubit 0 is the most significant bit). The JSON form is
``{"n": n, "amplitudes": [[re, im], ...]}``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .circuit import Circuit
from .errors import DimensionMismatch, FormatError
from .state import TargetState


def parse_statevector(text: str) -> TargetState:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            d = json.loads(text)
            n = int(d["n"])
            amps = np.array([complex(float(re), float(im)) for re, im in d["amplitudes"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad statevector JSON: {exc}") from exc
    else:
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise FormatError("empty statevector file")
        try:
            n = int(lines[0])
            pairs = [ln.split() for ln in lines[1:]]
            if any(len(p) != 2 for p in pairs):
                raise ValueError("each amplitude line needs exactly two numbers")
            amps = np.array([complex(float(re), float(im)) for re, im in pairs])
        except ValueError as exc:
            raise FormatError(f"bad statevector text: {exc}") from exc
    if n < 1 or amps.size != 2**n:
        raise DimensionMismatch(f"header says n={n} but {amps.size} amplitudes were given")
    return TargetState(n, amps)


def format_statevector(state: TargetState, as_json: bool = False) -> str:
    amps = state.amplitudes
    if as_json:
        return json.dumps({"n": state.n, "amplitudes": [[float(a.real), float(a.imag)] for a in amps]}) + "\n"
    lines = [str(state.n)] + [f"{float(a.real)!r} {float(a.imag)!r}" for a in amps]
    return "\n".join(lines) + "\n"


def read_statevector(path) -> TargetState:
    return parse_statevector(Path(path).read_text())


def write_statevector(path, state: TargetState, as_json: bool = False) -> None:
    Path(path).write_text(format_statevector(state, as_json))


def read_circuit(path) -> Circuit:
    try:
        return Circuit.from_json(Path(path).read_text())
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad circuit JSON: {exc}") from exc
