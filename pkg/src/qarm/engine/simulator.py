"""Dense statevector simulation, exact marginals and seeded shot sampling.

Basis index convention: qubit ``q`` contributes ``2**q`` to the index, so
qubit 0 is least significant.  Bitstrings print the highest qubit first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitError, GateKind, GateOp, householder_vector

NORM_TOL = 1e-9
PROB_CUTOFF = 1e-12
BIT_ORDER = "msb-first"

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise CircuitError(
                f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> StateVector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> StateVector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def fidelity(self, other: StateVector) -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


def _axis(num_qubits: int, qubit: int) -> int:
    # C-order reshape puts the most significant qubit on axis 0
    return num_qubits - 1 - qubit


def _apply_inplace(psi: np.ndarray, n: int, gate: GateOp) -> None:
    """Apply ``gate`` to the (2,)*n tensor ``psi`` in place."""
    for q in gate.qubits:
        if q >= n:
            raise CircuitError(f"qubit {q} out of range for {n}-qubit state")

    if gate.kind is GateKind.PREPARE:
        _apply_householder(psi, n, gate)
        return

    index: list = [slice(None)] * n
    for q, pol in gate.controls:
        index[_axis(n, q)] = pol
    # axes removed by integer indexing shift the target's position
    t_axis = _axis(n, gate.target)
    t_axis -= sum(1 for q, _ in gate.controls if _axis(n, q) < t_axis)
    sub = psi[tuple(index)]

    zero = [slice(None)] * sub.ndim
    one = [slice(None)] * sub.ndim
    zero[t_axis] = 0
    one[t_axis] = 1
    zero, one = tuple(zero), tuple(one)

    kind = gate.kind
    if kind in (GateKind.X, GateKind.MCX):
        tmp = sub[zero].copy()
        sub[zero] = sub[one]
        sub[one] = tmp
    elif kind in (GateKind.Z, GateKind.MCZ):
        sub[one] *= -1.0
    elif kind in (GateKind.PHASE, GateKind.MCPHASE):
        sub[one] *= complex(math.cos(gate.angle), math.sin(gate.angle))
    elif kind is GateKind.H:
        a = sub[zero].copy()
        b = sub[one]
        sub[zero] = (a + b) * _SQRT_HALF
        sub[one] = (a - b) * _SQRT_HALF
    else:  # pragma: no cover - exhaustive over GateKind
        raise CircuitError(f"unsupported gate {kind}")


def _apply_householder(psi: np.ndarray, n: int, gate: GateOp) -> None:
    v = householder_vector(gate.amplitudes)
    if v is None:
        return
    w = len(gate.targets)
    # leading axes ordered so the flattened row index is the register value
    axes = [_axis(n, q) for q in reversed(gate.targets)]
    moved = np.moveaxis(psi, axes, list(range(w))).reshape(2**w, -1)
    overlap = v.conj() @ moved
    moved = moved - 2.0 * np.outer(v, overlap)
    psi[...] = np.moveaxis(moved.reshape([2] * n), list(range(w)), axes)


def apply(state: StateVector, gate: GateOp) -> StateVector:
    psi = state.amplitudes.copy().reshape([2] * state.num_qubits)
    _apply_inplace(psi, state.num_qubits, gate)
    return StateVector(state.num_qubits, psi.reshape(-1))


def run(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    if initial is None:
        initial = StateVector.zero(circuit.num_qubits)
    if initial.num_qubits != circuit.num_qubits:
        raise CircuitError(
            f"circuit has {circuit.num_qubits} qubits, state has {initial.num_qubits}"
        )
    n = circuit.num_qubits
    psi = initial.amplitudes.copy().reshape([2] * n)
    for gate in circuit.gates:
        _apply_inplace(psi, n, gate)
    return StateVector(n, psi.reshape(-1))


# -- measurement ----------------------------------------------------------


@dataclass
class Histogram:
    """Outcome table keyed by bitstrings over ``qubits`` (highest qubit first).

    ``shots`` is ``None`` for exact probabilities, else the sample size.
    """

    entries: dict[str, float]
    qubits: tuple[int, ...]
    shots: int | None = None
    seed: int | None = None
    bit_order: str = BIT_ORDER
    metadata: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(self.shots) if self.shots is not None else 1.0

    @property
    def exact(self) -> bool:
        return self.shots is None

    def probability(self, bitstring: str) -> float:
        return self.entries.get(bitstring, 0.0) / self.total

    def sorted_items(self) -> list[tuple[str, float]]:
        """Entries by descending weight, then lexicographic bitstring."""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def most_probable(self) -> str:
        return self.sorted_items()[0][0]

    def bit(self, bitstring: str, qubit: int) -> int:
        pos = len(self.qubits) - 1 - self.qubits.index(qubit)
        return int(bitstring[pos])

    def value(self, bitstring: str, qubits: Sequence[int]) -> int:
        """Integer held by ``qubits`` (first listed is LSB) in ``bitstring``."""
        return sum(self.bit(bitstring, q) << b for b, q in enumerate(qubits))

    def to_dict(self) -> dict:
        return {
            "entries": dict(self.sorted_items()),
            "metadata": {
                "shots": self.shots,
                "seed": self.seed,
                "bit_order": self.bit_order,
                "qubits": list(self.qubits),
                **self.metadata,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> Histogram:
        meta = dict(data["metadata"])
        shots = meta.pop("shots")
        entries = {k: (int(v) if shots is not None else float(v)) for k, v in data["entries"].items()}
        return cls(
            entries,
            tuple(meta.pop("qubits")),
            shots=shots,
            seed=meta.pop("seed"),
            bit_order=meta.pop("bit_order"),
            metadata=meta,
        )

    @classmethod
    def from_json(cls, text: str) -> Histogram:
        return cls.from_dict(json.loads(text))


def _format(value: int, width: int) -> str:
    return format(value, f"0{width}b")


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Probability array indexed by the integer value of sorted ``qubits``."""
    qs = sorted(set(qubits))
    if not qs:
        raise CircuitError("measure at least one qubit")
    n = state.num_qubits
    if qs[-1] >= n or qs[0] < 0:
        raise CircuitError(f"qubits {qs} out of range for {n}-qubit state")
    probs = (np.abs(state.amplitudes) ** 2).reshape([2] * n)
    drop = tuple(_axis(n, q) for q in range(n) if q not in qs)
    marg = probs.sum(axis=drop) if drop else probs
    # remaining axes are in MSB-first order of qs, so flattening gives the value
    return np.asarray(marg).reshape(-1)


def exact_distribution(state: StateVector, qubits: Sequence[int]) -> Histogram:
    qs = tuple(sorted(set(qubits)))
    marg = marginal_probabilities(state, qs)
    entries = {
        _format(v, len(qs)): float(p) for v, p in enumerate(marg) if p > PROB_CUTOFF
    }
    return Histogram(entries, qs)


def sample(state: StateVector, qubits: Sequence[int], shots: int, seed: int) -> Histogram:
    """Multinomial draw of ``shots`` outcomes; identical output for identical seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qs = tuple(sorted(set(qubits)))
    marg = marginal_probabilities(state, qs)
    marg = np.clip(marg, 0.0, None)
    marg = marg / marg.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, marg)
    entries = {_format(v, len(qs)): int(c) for v, c in enumerate(counts) if c > 0}
    return Histogram(entries, qs, shots=shots, seed=seed)
