"""OpenQASM 2.0 emitter.

Multi-controlled gates are lowered to ``x``/``cx``/``ccx``/``cz``/``cu1``
with a clean-ancilla Toffoli V-chain; ancillas live in an extra ``anc``
register that starts and ends in |0>.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, GateKind, GateOp

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";'
ANCILLA_REGISTER = "anc"


def _angle(value: float) -> str:
    return format(value, ".17g")


@dataclass
class LoweredCircuit:
    data_qubits: int
    ancillas: int
    lines: list[str]
    prep_widths: list[int]


class _Lowerer:
    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.names = {}
        for reg in circuit.registers:
            for i, q in enumerate(reg.qubits):
                self.names[q] = f"{reg.name}[{i}]"
        self.lines: list[str] = []
        self.ancillas = 0
        self.prep_widths: set[int] = set()

    def q(self, qubit: int) -> str:
        return self.names[qubit]

    def anc(self, index: int) -> str:
        self.ancillas = max(self.ancillas, index + 1)
        return f"{ANCILLA_REGISTER}[{index}]"

    def emit(self, line: str) -> None:
        self.lines.append(line + ";")

    def toffoli_and(self, controls: list[str], first_anc: int) -> tuple[list[tuple[str, str, str]], str]:
        """Toffoli chain computing AND(controls) into an ancilla; needs >= 2 controls."""
        chain = [(controls[0], controls[1], self.anc(first_anc))]
        for i, c in enumerate(controls[2:], start=1):
            chain.append((c, chain[-1][2], self.anc(first_anc + i)))
        return chain, chain[-1][2]

    def mcx(self, controls: list[str], target: str) -> None:
        if len(controls) == 1:
            self.emit(f"cx {controls[0]},{target}")
        elif len(controls) == 2:
            self.emit(f"ccx {controls[0]},{controls[1]},{target}")
        else:
            chain, _ = self.toffoli_and(controls[:-1], 0)
            for a, b, c in chain:
                self.emit(f"ccx {a},{b},{c}")
            self.emit(f"ccx {controls[-1]},{chain[-1][2]},{target}")
            for a, b, c in reversed(chain):
                self.emit(f"ccx {a},{b},{c}")

    def lower(self, gate: GateOp) -> None:
        kind = gate.kind
        t = self.q(gate.target)
        if kind is GateKind.PREPARE:
            w = len(gate.targets)
            self.prep_widths.add(w)
            amps = " ".join(_angle(a.real) if a.imag == 0 else repr(a) for a in gate.amplitudes)
            self.lines.append(f"// householder state preparation, amplitudes: {amps}")
            self.emit(f"prep{w} " + ",".join(self.q(x) for x in gate.targets))
            return
        if kind is GateKind.H:
            self.emit(f"h {t}")
            return
        if kind is GateKind.X:
            self.emit(f"x {t}")
            return
        if kind is GateKind.Z:
            self.emit(f"z {t}")
            return
        if kind is GateKind.PHASE:
            self.emit(f"u1({_angle(gate.angle)}) {t}")
            return

        flips = [self.q(c) for c, pol in gate.controls if pol == 0]
        controls = [self.q(c) for c, _ in gate.controls]
        for c in flips:
            self.emit(f"x {c}")
        if kind is GateKind.MCX:
            self.mcx(controls, t)
        elif kind is GateKind.MCZ:
            if len(controls) == 1:
                self.emit(f"cz {controls[0]},{t}")
            else:
                self.emit(f"h {t}")
                self.mcx(controls, t)
                self.emit(f"h {t}")
        elif kind is GateKind.MCPHASE:
            angle = _angle(gate.angle)
            if len(controls) == 1:
                self.emit(f"cu1({angle}) {controls[0]},{t}")
            else:
                chain, flag = self.toffoli_and(controls, 0)
                for a, b, c in chain:
                    self.emit(f"ccx {a},{b},{c}")
                self.emit(f"cu1({angle}) {flag},{t}")
                for a, b, c in reversed(chain):
                    self.emit(f"ccx {a},{b},{c}")
        for c in flips:
            self.emit(f"x {c}")


def lower_circuit(circuit: Circuit) -> LoweredCircuit:
    """Lower every IR gate; returns gate lines without header or declarations."""
    lw = _Lowerer(circuit)
    for gate in circuit.gates:
        lw.lower(gate)
    return LoweredCircuit(circuit.num_qubits, lw.ancillas, lw.lines, sorted(lw.prep_widths))


def export_circuit_text(circuit: Circuit) -> str:
    lowered = lower_circuit(circuit)
    lines = [HEADER]
    for w in lowered.prep_widths:
        args = ",".join(f"a{i}" for i in range(w))
        lines.append(f"opaque prep{w} {args};")
    for reg in circuit.registers:
        lines.append(f"qreg {reg.name}[{reg.size}];")
    if lowered.ancillas:
        lines.append(f"qreg {ANCILLA_REGISTER}[{lowered.ancillas}];")
    if circuit.measured:
        lines.append(f"creg c[{len(circuit.measured)}];")
    lines.extend(lowered.lines)
    lw = _Lowerer(circuit)
    for j, q in enumerate(circuit.measured):
        lines.append(f"measure {lw.q(q)} -> c[{j}];")
    return "\n".join(lines) + "\n"


def count_gate_lines(text: str) -> int:
    """Number of gate applications in emitted text (declarations excluded)."""
    skip = ("OPENQASM", "include", "qreg", "creg", "opaque", "measure", "//", "barrier")
    return sum(1 for line in text.splitlines() if line.strip() and not line.startswith(skip))
