import numpy as np
import pytest

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def bell():
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def ghz(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def w_state(n):
    v = np.zeros(2**n, dtype=complex)
    for q in range(n):
        v[1 << q] = 1
    return v / np.linalg.norm(v)


def reduced_purities(amps):
    """Purity of every single-qubit reduced density matrix (qubit 0 first)."""
    amps = np.asarray(amps, dtype=complex)
    n = int(np.log2(amps.size))
    psi = amps.reshape((2,) * n)
    out = []
    for q in range(n):
        m = np.moveaxis(psi, q, 0).reshape(2, -1)
        rho = m @ m.conj().T
        out.append(float(np.real(np.trace(rho @ rho))))
    return out


def is_product_oracle(amps, tol=1e-9):
    return all(p > 1 - tol for p in reduced_purities(amps))


def embed(n, q, u, controls=()):
    """Full 2^n matrix of ``u`` on qubit ``q`` with (qubit, bit) controls, built entry by entry."""
    size = 2**n
    out = np.zeros((size, size), dtype=complex)
    for k in range(size):
        bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
        if all(bits[c] == v for c, v in controls):
            for o in range(2):
                nb = list(bits)
                nb[q] = o
                j = int("".join(map(str, nb)), 2)
                out[j, k] += u[o, bits[q]]
        else:
            out[k, k] += 1
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
