"""qARM iterations: parallel amplitude estimation, amplification, decoding, mining."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engine import Circuit, Histogram, exact_distribution, inverse_qft, run, sample
from .oracles import (
    OB_LABEL,
    RegisterLayout,
    append_candidate_superposition,
    append_grover,
    append_phase_ancilla_prep,
    append_smin_marker,
    append_zero_reflection,
    grid_support,
    marked_set,
)
from .transactions import (
    Itemset,
    TransactionDatabase,
    apriori_mine,
    generate_candidates,
    pad_to_power_of_two,
    support,
)

MODES = ("estimate-only", "full-qarm")
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    """Run parameters; ``shots == 0`` selects exact probabilities."""

    t: int = 4
    shots: int = 0
    seed: int = 0
    s_min: float = 0.5
    aa_rounds: int = 1
    mode: str = "full-qarm"

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.aa_rounds < 0:
            raise ValueError("aa_rounds must be >= 0")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if not 0 < self.s_min <= 1:
            raise ValueError(f"s_min must lie in (0, 1], got {self.s_min}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def exact(self) -> bool:
        return self.shots == 0

    @property
    def amplified(self) -> bool:
        return self.mode == "full-qarm" and self.aa_rounds > 0


# -- circuit assembly -------------------------------------------------------


def _layout(db: TransactionDatabase, k: int, t: int) -> RegisterLayout:
    return RegisterLayout.for_database(pad_to_power_of_two(db), k, t)


def pae_unitary(
    db: TransactionDatabase, layout: RegisterLayout, candidates: Sequence[Itemset]
) -> Circuit:
    """U_PAE: register preparation, controlled Grover powers, inverse QFT."""
    circ = layout.circuit()
    for q in (*layout.estimation, *layout.transaction):
        circ.h(q)
    circ.metadata["prep_method"] = append_candidate_superposition(circ, candidates, layout)
    for p, control in enumerate(layout.estimation):
        for _ in range(2**p):
            append_grover(circ, db, layout, control=control)
    circ.extend(inverse_qft(layout.estimation, layout.num_qubits), label="IQFT")
    return circ


def _check_candidates(db: TransactionDatabase, k: int, candidates: Sequence[Itemset]) -> list[Itemset]:
    cands = [tuple(c) for c in candidates]
    if not cands:
        raise ValueError("at least one candidate itemset is required")
    for c in cands:
        if len(c) != k or list(c) != sorted(set(c)):
            raise ValueError(f"candidate {c} is not a sorted {k}-itemset")
        if c[0] < 0 or c[-1] >= db.num_items:
            raise ValueError(f"candidate {c} references unknown items")
    return cands


def build_pae(db: TransactionDatabase, k: int, candidates: Sequence[Itemset], t: int) -> Circuit:
    """Estimation-only circuit: phase-ancilla prep then U_PAE, measuring items and estimation."""
    if t < 1:
        raise ValueError("t must be >= 1")
    padded = pad_to_power_of_two(db)
    cands = _check_candidates(db, k, candidates)
    layout = _layout(db, k, t)
    circ = layout.circuit()
    with circ.block("ancilla_prep"):
        append_phase_ancilla_prep(circ, layout)
    u = pae_unitary(padded, layout, cands)
    circ.extend(u, label="U_PAE")
    circ.metadata.update(prep_method=u.metadata["prep_method"], k=k, t=t)
    return circ.measure(layout.measured)


def build_qarm_iteration(
    db: TransactionDatabase, k: int, candidates: Sequence[Itemset], config: PipelineConfig
) -> Circuit:
    """U_PAE followed by ``aa_rounds`` of [O_smin, U_PAE^dagger, 2|0><0| - I, U_PAE]."""
    circ = build_pae(db, k, candidates, config.t)
    rounds = config.aa_rounds if config.mode == "full-qarm" else 0
    if rounds == 0:
        return circ
    layout = _layout(db, k, config.t)
    u = pae_unitary(pad_to_power_of_two(db), layout, _check_candidates(db, k, candidates))
    u_dag = u.inverse()
    for _ in range(rounds):
        with circ.block("O_smin"):
            append_smin_marker(circ, layout.estimation, config.s_min)
        circ.extend(u_dag, label="U_PAE_dagger")
        with circ.block("R0"):
            append_zero_reflection(circ, layout.data_qubits)
        circ.extend(u, label="U_PAE")
    circ.metadata["aa_rounds"] = rounds
    return circ


# -- decoding -----------------------------------------------------------------


@dataclass
class DecodedSupport:
    """Support estimate for one candidate, read off its estimation outcomes."""

    itemset: Itemset
    m_values: tuple[int, ...]
    support_estimate: float | None
    confidence: float
    paired: bool
    branch_mass: float = 0.0
    snapped_support: Fraction | None = None
    snapped: bool = False
    grid_error: float | None = None
    scaled_estimate: float | None = None

    @property
    def missing(self) -> bool:
        return self.support_estimate is None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["itemset"] = list(self.itemset)
        d["m_values"] = list(self.m_values)
        d["snapped_support"] = (
            None if self.snapped_support is None else str(self.snapped_support)
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DecodedSupport:
        d = dict(d)
        d["itemset"] = tuple(d["itemset"])
        d["m_values"] = tuple(d["m_values"])
        if d["snapped_support"] is not None:
            d["snapped_support"] = Fraction(d["snapped_support"])
        return cls(**d)


def grid_spacing(m: int, t: int) -> float:
    """Largest support change from moving one grid step away from m."""
    g = grid_support(m, t)
    return max(abs(grid_support(m - 1, t) - g), abs(grid_support(m + 1, t) - g))


def decode_supports(
    histogram: Histogram,
    layout: RegisterLayout,
    candidates: Sequence[Itemset],
    t: int | None = None,
    num_transactions: int | None = None,
) -> list[DecodedSupport]:
    """Pair-aware support decoding per candidate.

    The two heaviest estimation outcomes of a candidate are used when they
    pair up (m + m' = 2^t); otherwise the heaviest alone.  Ties prefer the
    smaller m.  With ``num_transactions`` the estimate is also snapped to the
    nearest representable support c/N.

    The circuit acts on the zero-padded database, so the grid value is a
    fraction of the padded row count; ``scaled_estimate`` re-expresses it
    over the ``num_transactions`` real rows.
    """
    t = layout.t if t is None else t
    rows = 2**layout.transaction_width
    size = 2**t
    by_item: dict[int, dict[int, float]] = {}
    for bits, weight in histogram.entries.items():
        item = histogram.value(bits, layout.items)
        m = histogram.value(bits, layout.estimation)
        slot = by_item.setdefault(item, {})
        slot[m] = slot.get(m, 0.0) + weight

    out = []
    for cand in candidates:
        outcomes = sorted(by_item.get(layout.encode(cand), {}).items(), key=lambda kv: (-kv[1], kv[0]))
        outcomes = [(m, w) for m, w in outcomes if w > 0]
        mass = float(sum(w for _, w in outcomes))
        if not outcomes:
            out.append(DecodedSupport(tuple(cand), (), None, 0.0, False, 0.0))
            continue
        m1, w1 = outcomes[0]
        if m1 not in (0, size // 2) and len(outcomes) > 1 and m1 + outcomes[1][0] == size:
            m_values, conf, paired = (m1, outcomes[1][0]), w1 + outcomes[1][1], True
        else:
            m_values, conf, paired = (m1,), w1, False
        est = grid_support(m1, t)
        dec = DecodedSupport(
            tuple(cand), m_values, est, float(conf), paired, mass, grid_error=grid_spacing(m1, t)
        )
        dec.scaled_estimate = est
        if num_transactions:
            count = min(round(est * rows), num_transactions)
            snap = Fraction(count, num_transactions)
            dec.scaled_estimate = min(1.0, est * rows / num_transactions) if rows != num_transactions else est
            dec.snapped_support = snap
            dec.snapped = abs(dec.scaled_estimate - float(snap)) > 1e-9
        out.append(dec)
    return out


# -- mining loop --------------------------------------------------------------


@dataclass
class IterationReport:
    k: int
    candidates: list[Itemset]
    qubits: int
    gate_count: int
    ob_count: int
    prep_method: str
    histogram: Histogram
    decoded: list[DecodedSupport]
    frequent: list[Itemset]
    marked_probability: float
    next_candidates: list[Itemset] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "candidates": [list(c) for c in self.candidates],
            "qubits": self.qubits,
            "gate_count": self.gate_count,
            "ob_count": self.ob_count,
            "prep_method": self.prep_method,
            "histogram": self.histogram.to_dict(),
            "decoded": [d.to_dict() for d in self.decoded],
            "frequent": [list(c) for c in self.frequent],
            "marked_probability": self.marked_probability,
            "next_candidates": [list(c) for c in self.next_candidates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> IterationReport:
        return cls(
            k=d["k"],
            candidates=[tuple(c) for c in d["candidates"]],
            qubits=d["qubits"],
            gate_count=d["gate_count"],
            ob_count=d["ob_count"],
            prep_method=d["prep_method"],
            histogram=Histogram.from_dict(d["histogram"]),
            decoded=[DecodedSupport.from_dict(x) for x in d["decoded"]],
            frequent=[tuple(c) for c in d["frequent"]],
            marked_probability=d["marked_probability"],
            next_candidates=[tuple(c) for c in d["next_candidates"]],
        )


@dataclass
class MiningReport:
    config: PipelineConfig
    iterations: list[IterationReport]
    item_labels: tuple[str, ...] = ()

    @property
    def frequent_itemsets(self) -> dict[Itemset, float]:
        """Accepted itemsets with their decoded support estimates."""
        out = {}
        for it in self.iterations:
            est = {d.itemset: d.scaled_estimate for d in it.decoded}
            for x in it.frequent:
                out[x] = est[x]
        return out

    def labels(self, itemset: Itemset) -> list[str]:
        return [self.item_labels[j] for j in itemset] if self.item_labels else list(itemset)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "item_labels": list(self.item_labels),
            "iterations": [it.to_dict() for it in self.iterations],
            "frequent_itemsets": [
                {"itemset": self.labels(x), "indices": list(x), "support": s}
                for x, s in sorted(self.frequent_itemsets.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> MiningReport:
        return cls(
            PipelineConfig(**d["config"]),
            [IterationReport.from_dict(x) for x in d["iterations"]],
            tuple(d.get("item_labels", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> MiningReport:
        return cls.from_dict(json.loads(text))


def _iteration_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


def measure(circuit: Circuit, config: PipelineConfig, k: int = 1) -> Histogram:
    state = run(circuit)
    if config.exact:
        return exact_distribution(state, circuit.measured)
    return sample(state, circuit.measured, config.shots, _iteration_seed(config.seed, k))


def marked_probability(histogram: Histogram, layout: RegisterLayout, s_min: float) -> float:
    marked = set(marked_set(layout.t, s_min))
    mass = sum(
        w for bits, w in histogram.entries.items() if histogram.value(bits, layout.estimation) in marked
    )
    return float(mass) / histogram.total


def run_iteration(
    db: TransactionDatabase, k: int, candidates: Sequence[Itemset], config: PipelineConfig
) -> IterationReport:
    layout = _layout(db, k, config.t)
    circ = build_qarm_iteration(db, k, candidates, config)
    hist = measure(circ, config, k)
    decoded = decode_supports(hist, layout, candidates, config.t, db.num_transactions)
    share = hist.total / len(candidates)
    frequent = []
    for d in decoded:
        if d.missing or d.scaled_estimate < config.s_min - SUPPORT_TOL:
            continue
        # after amplification a frequent candidate's branch must have grown
        if config.amplified and d.branch_mass < share * (1 - 1e-9):
            continue
        frequent.append(d.itemset)
    return IterationReport(
        k=k,
        candidates=list(candidates),
        qubits=circ.num_qubits,
        gate_count=len(circ),
        ob_count=circ.count_blocks(OB_LABEL),
        prep_method=circ.metadata["prep_method"],
        histogram=hist,
        decoded=decoded,
        frequent=sorted(frequent),
        marked_probability=marked_probability(hist, layout, config.s_min),
    )


def mine(db: TransactionDatabase, config: PipelineConfig) -> MiningReport:
    """Iterate quantum support estimation with classical join/prune until no candidates remain."""
    iterations = []
    candidates: list[Itemset] = [(j,) for j in range(db.num_items)]
    k = 1
    while candidates:
        report = run_iteration(db, k, candidates, config)
        candidates = generate_candidates(report.frequent)
        report.next_candidates = candidates
        iterations.append(report)
        k += 1
    return MiningReport(config, iterations, db.item_labels[: db.num_items])


# -- classical cross-check ---------------------------------------------------


@dataclass
class EquivalenceReport:
    equal: bool
    quantum: set[Itemset]
    classical: set[Itemset]
    max_discrepancy: float
    off_grid: list[Itemset]

    @property
    def missing(self) -> set[Itemset]:
        return self.classical - self.quantum

    @property
    def extra(self) -> set[Itemset]:
        return self.quantum - self.classical


def on_grid(value: float, t: int) -> bool:
    return any(abs(grid_support(m, t) - value) < 1e-9 for m in range(2 ** (t - 1) + 1))


def compare_with_classical(db: TransactionDatabase, config: PipelineConfig) -> EquivalenceReport:
    report = mine(db, config)
    classical = apriori_mine(db, config.s_min)
    rows = pad_to_power_of_two(db).shape[0]
    worst = 0.0
    off = []
    for it in report.iterations:
        for d in it.decoded:
            true = float(support(db, d.itemset))
            # the circuit encodes the fraction of padded rows
            if not on_grid(true * db.num_transactions / rows, config.t):
                off.append(d.itemset)
            if d.scaled_estimate is not None:
                worst = max(worst, abs(d.scaled_estimate - true))
    quantum = set(report.frequent_itemsets)
    return EquivalenceReport(quantum == classical.itemsets(), quantum, classical.itemsets(), worst, off)
