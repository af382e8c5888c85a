"""Quantum Fourier transform circuits on a contiguous or arbitrary register."""

from __future__ import annotations

import math
from typing import Sequence

from .circuit import Circuit, CircuitError


def qft(qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    """Forward QFT, |x> -> sum_y exp(2 pi i x y / 2^w) |y> / sqrt(2^w).

    ``qubits[0]`` is the least significant bit of x and y.  Terminal swaps are
    explicit so the circuit needs no relabelling.
    """
    qs = list(qubits)
    if not qs:
        raise CircuitError("QFT register must be nonempty")
    circ = Circuit(num_qubits if num_qubits is not None else max(qs) + 1)
    w = len(qs)
    for j in reversed(range(w)):
        circ.h(qs[j])
        for l in reversed(range(j)):
            circ.phase(qs[j], math.pi / 2 ** (j - l), controls=[qs[l]])
    for i in range(w // 2):
        circ.swap(qs[i], qs[w - 1 - i])
    return circ


def inverse_qft(qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    return qft(qubits, num_qubits).inverse()
