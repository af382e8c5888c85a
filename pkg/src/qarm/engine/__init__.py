"""Statevector engine: circuit IR, exact simulation, sampling and QASM export."""

from .circuit import Block, Circuit, CircuitError, GateKind, GateOp, Register, pattern_controls
from .qasm import count_gate_lines, export_circuit_text, lower_circuit
from .qft import inverse_qft, qft
from .simulator import (
    Histogram,
    StateVector,
    apply,
    exact_distribution,
    marginal_probabilities,
    run,
    sample,
)

__all__ = [
    "Block",
    "Circuit",
    "CircuitError",
    "GateKind",
    "GateOp",
    "Histogram",
    "Register",
    "StateVector",
    "apply",
    "count_gate_lines",
    "exact_distribution",
    "export_circuit_text",
    "inverse_qft",
    "lower_circuit",
    "marginal_probabilities",
    "pattern_controls",
    "qft",
    "run",
    "sample",
]
