"""Circuit synthesis for the qARM building blocks.

Every synthesizer appends gates over a :class:`RegisterLayout`.  The layout
orders registers as estimation, transaction, item blocks 1..k, ancillas, so
qubit indices grow in that order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence

from .engine import Circuit, CircuitError, pattern_controls
from .engine.circuit import Control
from .transactions import DatabaseError, Itemset, TransactionDatabase

OB_LABEL = "O_B"
GROVER_LABEL = "G"


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit allocation for one qARM iteration.

    ``t`` may be 0 for stand-alone oracle circuits.  With ``k == 1`` the only
    ancilla is the phase qubit; with ``k >= 2`` there are ``k`` flag qubits
    followed by the phase qubit.
    """

    t: int
    transaction_width: int
    item_width: int
    k: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise CircuitError("k must be >= 1")
        if self.t < 0 or self.transaction_width < 0 or self.item_width < 0:
            raise CircuitError("register widths must be nonnegative")

    @classmethod
    def for_database(cls, db: TransactionDatabase, k: int = 1, t: int = 0) -> RegisterLayout:
        n, m = db.shape
        if not db.is_padded:
            raise DatabaseError("database must be padded to powers of two")
        return cls(t, int(math.log2(n)), int(math.log2(m)), k)

    @property
    def estimation(self) -> tuple[int, ...]:
        return tuple(range(self.t))

    @property
    def transaction(self) -> tuple[int, ...]:
        return tuple(range(self.t, self.t + self.transaction_width))

    def item_block(self, l: int) -> tuple[int, ...]:
        """Qubits of item block ``l`` (1-based)."""
        if not 1 <= l <= self.k:
            raise CircuitError(f"item block {l} outside 1..{self.k}")
        start = self.t + self.transaction_width + (l - 1) * self.item_width
        return tuple(range(start, start + self.item_width))

    @property
    def items(self) -> tuple[int, ...]:
        return tuple(q for l in range(1, self.k + 1) for q in self.item_block(l))

    @property
    def num_ancillas(self) -> int:
        return 1 if self.k == 1 else self.k + 1

    @property
    def ancillas(self) -> tuple[int, ...]:
        start = self.t + self.transaction_width + self.k * self.item_width
        return tuple(range(start, start + self.num_ancillas))

    @property
    def flags(self) -> tuple[int, ...]:
        return () if self.k == 1 else self.ancillas[:-1]

    @property
    def phase(self) -> int:
        return self.ancillas[-1]

    @property
    def data_qubits(self) -> tuple[int, ...]:
        """Every non-ancilla qubit."""
        return (*self.estimation, *self.transaction, *self.items)

    @property
    def measured(self) -> tuple[int, ...]:
        return (*self.estimation, *self.items)

    @property
    def num_qubits(self) -> int:
        return self.t + self.transaction_width + self.k * self.item_width + self.num_ancillas

    def circuit(self) -> Circuit:
        sizes = [("estimation", self.t), ("transaction", self.transaction_width)]
        sizes += [(f"item{l}", self.item_width) for l in range(1, self.k + 1)]
        sizes.append(("ancilla", self.num_ancillas))
        return Circuit.from_sizes(sizes)

    def encode(self, itemset: Itemset) -> int:
        """Item-register value for ``itemset``; block l holds its l-th item."""
        if len(itemset) != self.k:
            raise CircuitError(f"itemset {itemset} is not a {self.k}-itemset")
        value = 0
        for l, j in enumerate(itemset):
            if not 0 <= j < 2**self.item_width:
                raise CircuitError(f"item index {j} exceeds {self.item_width}-qubit block")
            value |= j << (l * self.item_width)
        return value

    def decode(self, value: int) -> tuple[int, ...]:
        mask = (1 << self.item_width) - 1
        return tuple((value >> (l * self.item_width)) & mask for l in range(self.k))


@dataclass(frozen=True)
class GridAngle:
    m: int
    t: int

    @property
    def theta_over_pi(self) -> Fraction:
        return Fraction(self.m, 2**self.t)

    @property
    def support(self) -> float:
        return grid_support(self.m, self.t)


def grid_support(m: int, t: int) -> float:
    """sin^2(pi m / 2^t), folded so that m and 2^t - m give identical floats."""
    size = 2**t
    m = m % size
    m = min(m, size - m)
    if m == 0:
        return 0.0
    if 2 * m == size:
        return 1.0
    if 4 * m == size:
        return 0.5
    return math.sin(math.pi * m / size) ** 2


def _require_padded(db: TransactionDatabase) -> None:
    if not db.is_padded:
        raise DatabaseError(f"database shape {db.shape} is not padded to powers of two")


def _check_layout(db: TransactionDatabase, layout: RegisterLayout) -> None:
    n, m = db.shape
    if 2**layout.transaction_width != n or 2**layout.item_width != m:
        raise CircuitError(f"layout widths do not match database shape {db.shape}")


def append_ob(
    circ: Circuit,
    db: TransactionDatabase,
    layout: RegisterLayout,
    block: int,
    target: int,
    controls: Sequence[Control] = (),
) -> None:
    """Append one labelled O_B instantiation: |i>|j>|a> -> |i>|j>|a xor D_ij>."""
    rows, cols = db.matrix.nonzero()
    with circ.block(OB_LABEL):
        for i, j in zip(rows.tolist(), cols.tolist()):
            ctrl = pattern_controls(layout.transaction, i) + pattern_controls(layout.item_block(block), j)
            circ.x(target, controls=[*ctrl, *controls])


def synth_OB(db: TransactionDatabase, layout: RegisterLayout | None = None) -> Circuit:
    """Basic database oracle on transaction, item block 1 and the phase ancilla."""
    _require_padded(db)
    layout = layout or RegisterLayout.for_database(db)
    _check_layout(db, layout)
    circ = layout.circuit()
    append_ob(circ, db, layout, 1, layout.phase)
    return circ


def append_ok(
    circ: Circuit,
    db: TransactionDatabase,
    layout: RegisterLayout,
    control: int | None = None,
) -> None:
    """Phase oracle (-1)^{prod_l D_{i j_l}}, with the phase ancilla in |->.

    When ``control`` is given only the phase kick is controlled; the flag
    compute/uncompute pairs cancel on their own.
    """
    extra = [(control, 1)] if control is not None else []
    if layout.k == 1:
        append_ob(circ, db, layout, 1, layout.phase, extra)
        return
    for l, flag in enumerate(layout.flags, start=1):
        append_ob(circ, db, layout, l, flag)
    circ.x(layout.phase, controls=[*((f, 1) for f in layout.flags), *extra])
    for l, flag in reversed(list(enumerate(layout.flags, start=1))):
        append_ob(circ, db, layout, l, flag)


def synth_Ok(db: TransactionDatabase, k: int, layout: RegisterLayout | None = None) -> Circuit:
    _require_padded(db)
    layout = layout or RegisterLayout.for_database(db, k)
    if layout.k != k:
        raise CircuitError(f"layout has {layout.k} item blocks, expected {k}")
    _check_layout(db, layout)
    circ = layout.circuit()
    append_ok(circ, db, layout)
    return circ


def append_minus_identity(circ: Circuit, qubit: int, control: int | None = None) -> None:
    """Global phase -1 (X Z X Z); collapses to Z on ``control`` when controlled."""
    if control is not None:
        circ.z(control)
        return
    circ.x(qubit).z(qubit).x(qubit).z(qubit)


def append_zero_reflection(circ: Circuit, qubits: Sequence[int], control: int | None = None) -> None:
    """2|0..0><0..0| - I on ``qubits``, optionally controlled."""
    qs = list(qubits)
    if not qs:
        return  # one-dimensional space: the reflection is the identity
    if len(qs) == 1 and control is None:
        circ.z(qs[0])
        return
    ctrl = [(q, 0) for q in qs[1:]]
    if control is not None:
        ctrl.append((control, 1))
    # X-conjugated Z on qs[0] flips only |0..0>, giving I - 2|0><0|
    circ.x(qs[0])
    circ.z(qs[0], controls=ctrl)
    circ.x(qs[0])
    append_minus_identity(circ, qs[0], control)


def append_diffusion(circ: Circuit, qubits: Sequence[int], control: int | None = None) -> None:
    qs = list(qubits)
    for q in qs:
        circ.h(q)
    append_zero_reflection(circ, qs, control)
    for q in qs:
        circ.h(q)


def synth_diffusion(num_transaction_qubits: int) -> Circuit:
    """H^n (2|0><0| - I) H^n, the reflection about the uniform superposition."""
    if num_transaction_qubits < 1:
        raise CircuitError("diffusion needs at least one qubit")
    circ = Circuit.from_sizes([("transaction", num_transaction_qubits)])
    append_diffusion(circ, range(num_transaction_qubits))
    return circ


def append_grover(
    circ: Circuit,
    db: TransactionDatabase,
    layout: RegisterLayout,
    control: int | None = None,
) -> None:
    with circ.block(GROVER_LABEL):
        append_ok(circ, db, layout, control)
        append_diffusion(circ, layout.transaction, control)


def synth_grover(db: TransactionDatabase, k: int, layout: RegisterLayout | None = None) -> Circuit:
    _require_padded(db)
    layout = layout or RegisterLayout.for_database(db, k)
    _check_layout(db, layout)
    circ = layout.circuit()
    append_grover(circ, db, layout)
    return circ


def append_phase_ancilla_prep(circ: Circuit, layout: RegisterLayout) -> None:
    circ.x(layout.phase).h(layout.phase)


def marked_set(t: int, s_min: float) -> list[int]:
    """Estimation values m >= 1 whose grid support reaches ``s_min`` (inclusive)."""
    if not 0 < s_min <= 1:
        raise ValueError(f"s_min must lie in (0, 1], got {s_min}")
    if t < 1:
        raise ValueError("t must be >= 1")
    return [m for m in range(1, 2**t) if grid_support(m, t) >= s_min - 1e-12]


def append_smin_marker(circ: Circuit, qubits: Sequence[int], s_min: float) -> None:
    qs = list(qubits)
    for m in marked_set(len(qs), s_min):
        # target the highest set bit of m (always exists since m >= 1)
        top = m.bit_length() - 1
        ctrl = [c for c in pattern_controls(qs, m) if c[0] != qs[top]]
        circ.z(qs[top], controls=ctrl)


def synth_smin_marker(t: int, s_min: float) -> Circuit:
    circ = Circuit.from_sizes([("estimation", t)])
    append_smin_marker(circ, range(t), s_min)
    return circ


def candidate_amplitudes(candidates: Sequence[Itemset], layout: RegisterLayout) -> list[float]:
    if not candidates:
        raise CircuitError("at least one candidate is required")
    dim = 2 ** (layout.k * layout.item_width)
    codes = sorted({layout.encode(c) for c in candidates})
    amps = [0.0] * dim
    for c in codes:
        amps[c] = 1.0 / math.sqrt(len(codes))
    return amps


def append_candidate_superposition(
    circ: Circuit, candidates: Sequence[Itemset], layout: RegisterLayout
) -> str:
    """Prepare the uniform candidate superposition; returns the method used.

    ``"hadamard"`` for the full 1-itemset set, ``"basis"`` for a single
    candidate, otherwise ``"householder"`` (a simulator-level PREPARE gate).
    """
    amps = candidate_amplitudes(candidates, layout)
    support = [i for i, a in enumerate(amps) if a]
    qubits = layout.items
    if len(support) == len(amps):
        for q in qubits:
            circ.h(q)
        return "hadamard"
    if len(support) == 1:
        for b, q in enumerate(qubits):
            if (support[0] >> b) & 1:
                circ.x(q)
        return "basis"
    circ.prepare(qubits, amps)
    return "householder"


def prep_candidate_superposition(candidates: Sequence[Itemset], layout: RegisterLayout) -> Circuit:
    circ = layout.circuit()
    circ.metadata["prep_method"] = append_candidate_superposition(circ, candidates, layout)
    return circ
