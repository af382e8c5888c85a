"""Gate-level circuit IR shared by synthesis, simulation and export."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class CircuitError(ValueError):
    """Raised for malformed gates or circuits."""


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    Z = "z"
    PHASE = "p"
    MCX = "mcx"
    MCZ = "mcz"
    MCPHASE = "mcp"
    # Householder state preparation on a register; simulator-only, self-inverse.
    PREPARE = "prepare"


_CONTROLLED_KIND = {
    GateKind.X: GateKind.MCX,
    GateKind.Z: GateKind.MCZ,
    GateKind.PHASE: GateKind.MCPHASE,
}
_BASE_KIND = {v: k for k, v in _CONTROLLED_KIND.items()}

Control = tuple[int, int]


@dataclass(frozen=True)
class GateOp:
    """One gate application.

    ``controls`` holds ``(qubit, polarity)`` pairs; polarity 1 fires on
    ``|1>``, polarity 0 on ``|0>``.
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    angle: float | None = None
    amplitudes: tuple[complex, ...] | None = None

    def __post_init__(self) -> None:
        kind = self.kind
        if kind is GateKind.PREPARE:
            if self.controls:
                raise CircuitError("PREPARE cannot be controlled")
            if self.amplitudes is None or len(self.amplitudes) != 2 ** len(self.targets):
                raise CircuitError("PREPARE needs 2**len(targets) amplitudes")
            norm = sum(abs(a) ** 2 for a in self.amplitudes)
            if abs(norm - 1.0) > 1e-9:
                raise CircuitError(f"PREPARE amplitudes not normalized ({norm})")
        elif len(self.targets) != 1:
            raise CircuitError(f"{kind.name} takes exactly one target")
        if kind in (GateKind.H, GateKind.X, GateKind.Z, GateKind.PHASE) and self.controls:
            raise CircuitError(f"{kind.name} takes no controls; use the multi-controlled kind")
        if kind in (GateKind.MCX, GateKind.MCZ, GateKind.MCPHASE) and not self.controls:
            raise CircuitError(f"{kind.name} needs at least one control")
        if kind in (GateKind.PHASE, GateKind.MCPHASE):
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError(f"non-finite phase angle {self.angle!r}")
        for q, pol in self.controls:
            if pol not in (0, 1):
                raise CircuitError(f"control polarity must be 0 or 1, got {pol!r}")
        qubits = [*self.targets, *(q for q, _ in self.controls)]
        if any(q < 0 for q in qubits):
            raise CircuitError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"gate qubits not distinct: {qubits}")

    @property
    def target(self) -> int:
        return self.targets[0]

    @property
    def qubits(self) -> tuple[int, ...]:
        return (*self.targets, *(q for q, _ in self.controls))

    def adjoint(self) -> GateOp:
        if self.kind in (GateKind.PHASE, GateKind.MCPHASE):
            return GateOp(self.kind, self.targets, self.controls, angle=-self.angle)
        # H, X, Z, their controlled forms and Householder PREPARE are involutions
        return self

    def with_controls(self, extra: Sequence[Control]) -> GateOp:
        """Return this gate with additional controls attached."""
        if not extra:
            return self
        if self.kind in (GateKind.H, GateKind.PREPARE):
            raise CircuitError(f"cannot control {self.kind.name}")
        kind = _CONTROLLED_KIND.get(self.kind, self.kind)
        return GateOp(kind, self.targets, (*self.controls, *extra), angle=self.angle)


def _controls(controls: Iterable[int | Control] | None) -> tuple[Control, ...]:
    out = []
    for c in controls or ():
        if isinstance(c, tuple):
            out.append((int(c[0]), int(c[1])))
        else:
            out.append((int(c), 1))
    return tuple(out)


def pattern_controls(qubits: Sequence[int], value: int) -> tuple[Control, ...]:
    """Controls firing when ``qubits`` (LSB first) hold the integer ``value``."""
    return tuple((q, (value >> b) & 1) for b, q in enumerate(qubits))


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    size: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.start + self.size))


@dataclass(frozen=True)
class Block:
    label: str
    start: int
    stop: int


@dataclass
class Circuit:
    """Ordered gate list over ``num_qubits`` qubits.

    Registers are named contiguous ranges that must tile the qubits.  Blocks
    label gate spans (for example every instantiation of a database oracle)
    so structure survives composition and inversion.
    """

    num_qubits: int
    registers: tuple[Register, ...] = ()
    gates: list[GateOp] = field(default_factory=list)
    blocks: list[Block] = field(default_factory=list)
    measured: tuple[int, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        if not self.registers:
            self.registers = (Register("q", 0, self.num_qubits),)
        covered = sorted(q for r in self.registers for q in r.qubits)
        if covered != list(range(self.num_qubits)):
            raise CircuitError("registers must be disjoint and cover every qubit")
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise CircuitError(f"duplicate register names {names}")
        for g in self.gates:
            self._check(g)

    @classmethod
    def from_sizes(cls, sizes: Sequence[tuple[str, int]], **kwargs) -> Circuit:
        regs, start = [], 0
        for name, size in sizes:
            if size > 0:
                regs.append(Register(name, start, size))
                start += size
        return cls(start, tuple(regs), **kwargs)

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def empty_like(self) -> Circuit:
        return Circuit(self.num_qubits, self.registers)

    def _check(self, gate: GateOp) -> None:
        bad = [q for q in gate.qubits if q >= self.num_qubits]
        if bad:
            raise CircuitError(f"qubit index {bad} out of range for {self.num_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    # -- building -----------------------------------------------------------
    def append(self, gate: GateOp) -> Circuit:
        self._check(gate)
        self.gates.append(gate)
        return self

    def h(self, qubit: int) -> Circuit:
        return self.append(GateOp(GateKind.H, (qubit,)))

    def x(self, qubit: int, controls=None) -> Circuit:
        return self.append(GateOp(GateKind.X, (qubit,)).with_controls(_controls(controls)))

    def z(self, qubit: int, controls=None) -> Circuit:
        return self.append(GateOp(GateKind.Z, (qubit,)).with_controls(_controls(controls)))

    def phase(self, qubit: int, angle: float, controls=None) -> Circuit:
        gate = GateOp(GateKind.PHASE, (qubit,), angle=float(angle))
        return self.append(gate.with_controls(_controls(controls)))

    def swap(self, a: int, b: int) -> Circuit:
        return self.x(b, [a]).x(a, [b]).x(b, [a])

    def prepare(self, qubits: Sequence[int], amplitudes: Sequence[complex]) -> Circuit:
        amps = tuple(complex(a) for a in amplitudes)
        return self.append(GateOp(GateKind.PREPARE, tuple(qubits), amplitudes=amps))

    def extend(self, other: Circuit | Iterable[GateOp], label: str | None = None) -> Circuit:
        """Append gates (and nested blocks) of ``other``; optionally label the span."""
        start = len(self.gates)
        if isinstance(other, Circuit):
            if other.num_qubits > self.num_qubits:
                raise CircuitError("cannot extend with a wider circuit")
            for g in other.gates:
                self.append(g)
            self.blocks.extend(Block(b.label, b.start + start, b.stop + start) for b in other.blocks)
        else:
            for g in other:
                self.append(g)
        if label is not None:
            self.blocks.append(Block(label, start, len(self.gates)))
        return self

    def block(self, label: str) -> _BlockContext:
        """Context manager labelling every gate appended inside it."""
        return _BlockContext(self, label)

    def measure(self, qubits: Sequence[int]) -> Circuit:
        self.measured = tuple(sorted(set(qubits)))
        for q in self.measured:
            if not 0 <= q < self.num_qubits:
                raise CircuitError(f"measured qubit {q} out of range")
        return self

    # -- transforms ---------------------------------------------------------
    def inverse(self) -> Circuit:
        n = len(self.gates)
        inv = Circuit(
            self.num_qubits,
            self.registers,
            [g.adjoint() for g in reversed(self.gates)],
            [Block(b.label, n - b.stop, n - b.start) for b in self.blocks],
            metadata=dict(self.metadata),
        )
        return inv

    def count_blocks(self, label: str) -> int:
        return sum(1 for b in self.blocks if b.label == label)

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind.value] = counts.get(g.kind.value, 0) + 1
        return counts


class _BlockContext:
    def __init__(self, circuit: Circuit, label: str):
        self.circuit = circuit
        self.label = label

    def __enter__(self) -> Circuit:
        self.start = len(self.circuit.gates)
        return self.circuit

    def __exit__(self, *exc) -> None:
        if exc[0] is None:
            self.circuit.blocks.append(Block(self.label, self.start, len(self.circuit.gates)))


def householder_vector(amplitudes: Sequence[complex]) -> np.ndarray | None:
    """Unit vector v with (I - 2 v v^dagger)|0> = amplitudes, or None if identity.

    Requires amplitudes[0] real, which uniform candidate superpositions satisfy.
    """
    psi = np.asarray(amplitudes, dtype=complex)
    if abs(psi[0].imag) > 1e-12:
        raise CircuitError("Householder preparation needs a real first amplitude")
    v = -psi.copy()
    v[0] += 1.0
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        return None
    return v / norm
