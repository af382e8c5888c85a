import math
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from qarm.engine import Circuit, GateKind
from qarm.transactions import TransactionDatabase

DATA = Path(__file__).parent / "data"

D2_MATRIX = [[0, 1], [1, 1]]
D4_MATRIX = [[1, 0, 1, 0], [1, 1, 1, 1], [1, 1, 1, 1], [1, 0, 0, 1]]


@pytest.fixture
def db2():
    return TransactionDatabase.from_matrix(D2_MATRIX)


@pytest.fixture
def d4():
    return TransactionDatabase.from_matrix(D4_MATRIX, ["I0", "I1", "I2", "I3"])


# -- brute-force dense oracle ------------------------------------------------
# Builds each gate's full 2^n x 2^n matrix column by column from bit
# arithmetic; shares no code with the tensor simulator.

_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _local(gate):
    if gate.kind in (GateKind.H,):
        return _H
    if gate.kind in (GateKind.X, GateKind.MCX):
        return np.array([[0, 1], [1, 0]])
    if gate.kind in (GateKind.Z, GateKind.MCZ):
        return np.diag([1, -1])
    return np.diag([1, np.exp(1j * gate.angle)])


def gate_matrix(gate, n):
    dim = 2**n
    U = np.zeros((dim, dim), dtype=complex)
    if gate.kind is GateKind.PREPARE:
        psi = np.array(gate.amplitudes)
        v = -psi.copy()
        v[0] += 1
        R = np.eye(len(psi)) - 2 * np.outer(v, v.conj()) / np.vdot(v, v) if np.linalg.norm(v) > 1e-12 else np.eye(len(psi))
        for col in range(dim):
            r = sum(((col >> q) & 1) << b for b, q in enumerate(gate.targets))
            base = col
            for q in gate.targets:
                base &= ~(1 << q)
            for r2 in range(len(psi)):
                row = base
                for b, q in enumerate(gate.targets):
                    row |= ((r2 >> b) & 1) << q
                U[row, col] += R[r2, r]
        return U
    loc = _local(gate)
    t = gate.target
    for col in range(dim):
        if all(((col >> q) & 1) == pol for q, pol in gate.controls):
            bit = (col >> t) & 1
            for nb in (0, 1):
                row = (col & ~(1 << t)) | (nb << t)
                U[row, col] += loc[nb, bit]
        else:
            U[col, col] = 1
    return U


def circuit_unitary(circ: Circuit):
    U = np.eye(2**circ.num_qubits, dtype=complex)
    for g in circ.gates:
        U = gate_matrix(g, circ.num_qubits) @ U
    return U


def restrict(U, n, order):
    """Re-express U in a basis where ``order[0]`` is the most significant qubit."""
    dim = 2**n
    perm = np.zeros(dim, dtype=int)
    for idx in range(dim):
        native = 0
        for pos, q in enumerate(order):
            bit = (idx >> (n - 1 - pos)) & 1
            native |= bit << q
        perm[idx] = native
    return U[np.ix_(perm, perm)]


# -- on-grid database family -------------------------------------------------


@lru_cache(maxsize=None)
def on_grid_4x4() -> np.ndarray:
    """Every 4x4 binary matrix whose column counts and pairwise column
    intersections lie in {0, 2, 4}, i.e. supports in {0, 1/2, 1}."""
    codes = np.arange(2**16)
    mats = ((codes[:, None] >> np.arange(16)) & 1).reshape(-1, 4, 4)
    gram = np.einsum("nik,nil->nkl", mats, mats)
    ok = np.isin(gram, (0, 2, 4)).all(axis=(1, 2))
    return mats[ok]


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
