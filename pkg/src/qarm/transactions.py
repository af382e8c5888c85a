"""Transaction databases, exact supports and the classical Apriori miner."""

from __future__ import annotations

import csv
import io
import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Itemset = tuple[int, ...]


class DatabaseError(ValueError):
    """Malformed database input or invalid itemset."""


def _natural_key(label: str):
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", label)]


def next_power_of_two(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


@dataclass(frozen=True, eq=False)
class TransactionDatabase:
    """Binary matrix ``D`` (rows transactions, columns items) with labels.

    ``num_transactions``/``num_items`` always refer to the original data;
    padding only widens ``matrix``.
    """

    matrix: np.ndarray
    item_labels: tuple[str, ...]
    transaction_labels: tuple[str, ...]
    num_transactions: int
    num_items: int
    padded_rows: int = 0
    padded_cols: int = 0

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=np.int8, copy=True)
        if mat.ndim != 2:
            raise DatabaseError("matrix must be two-dimensional")
        if not np.isin(mat, (0, 1)).all():
            raise DatabaseError("matrix entries must be 0 or 1")
        if len(set(self.item_labels)) != len(self.item_labels):
            raise DatabaseError("item labels must be unique")
        if mat.shape != (self.num_transactions + self.padded_rows, self.num_items + self.padded_cols):
            raise DatabaseError("matrix shape disagrees with declared sizes")
        if mat[self.num_transactions:].any() or mat[:, self.num_items:].any():
            raise DatabaseError("padding rows and columns must be zero")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_matrix(
        cls,
        matrix: Sequence[Sequence[int]],
        item_labels: Sequence[str] | None = None,
        transaction_labels: Sequence[str] | None = None,
    ) -> TransactionDatabase:
        rows = [list(r) for r in matrix]
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DatabaseError(f"ragged matrix rows (lengths {sorted(widths)})")
        m = widths.pop() if widths else len(item_labels or ())
        for r in rows:
            for v in r:
                if v not in (0, 1):
                    raise DatabaseError(f"non-binary matrix entry {v!r}")
        n = len(rows)
        items = tuple(item_labels) if item_labels is not None else tuple(f"I{j}" for j in range(m))
        if len(items) != m:
            raise DatabaseError(f"{len(items)} item labels for {m} columns")
        txns = (
            tuple(transaction_labels)
            if transaction_labels is not None
            else tuple(f"T{i}" for i in range(n))
        )
        if len(txns) != n:
            raise DatabaseError(f"{len(txns)} transaction labels for {n} rows")
        mat = np.array(rows, dtype=np.int8).reshape(n, m)
        return cls(mat, items, txns, n, m)

    def _key(self):
        return (
            self.matrix.shape,
            self.matrix.tobytes(),
            self.item_labels,
            self.transaction_labels,
            self.num_transactions,
            self.num_items,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransactionDatabase):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_padded(self) -> bool:
        n, m = self.shape
        return n == next_power_of_two(n) and m == next_power_of_two(m)

    def item_index(self, label: str) -> int:
        try:
            return self.item_labels.index(label)
        except ValueError:
            raise DatabaseError(f"unknown item {label!r}") from None

    def labels_of(self, itemset: Itemset) -> tuple[str, ...]:
        return tuple(self.item_labels[j] for j in itemset)

    def parse_itemset(self, labels: Iterable[str]) -> Itemset:
        return make_itemset(self.item_index(lab.strip()) for lab in labels)

    def to_json(self) -> str:
        n, m = self.num_transactions, self.num_items
        return json.dumps(
            {
                "items": list(self.item_labels[:m]),
                "transactions": list(self.transaction_labels[:n]),
                "matrix": self.matrix[:n, :m].tolist(),
            }
        )


def make_itemset(items: Iterable[int]) -> Itemset:
    return tuple(sorted(set(int(i) for i in items)))


def parse_database(source: str, format: str = "csv-transactions", items: Sequence[str] | None = None) -> TransactionDatabase:
    """Build a database from CSV transactions or a JSON matrix.

    CSV: one line per transaction, first field the transaction label, then
    item labels.  Without ``items`` the item set is every label seen, in
    natural sort order.  JSON: ``{"items": [...], "matrix": [[0|1, ...], ...]}``
    with an optional ``"transactions"`` label list.
    """
    if format in ("csv", "csv-transactions"):
        return _parse_csv(source, items)
    if format in ("json", "json-matrix"):
        return _parse_json(source)
    raise DatabaseError(f"unknown database format {format!r}")


def _parse_csv(source: str, items: Sequence[str] | None) -> TransactionDatabase:
    txns: list[tuple[str, list[str]]] = []
    for row in csv.reader(io.StringIO(source)):
        fields = [f.strip() for f in row]
        if not any(fields):
            continue
        label, members = fields[0], [f for f in fields[1:] if f]
        txns.append((label, members))
    labels = [t for t, _ in txns]
    if len(set(labels)) != len(labels):
        raise DatabaseError("duplicate transaction labels")
    if items is None:
        seen = {i for _, ms in txns for i in ms}
        items = sorted(seen, key=_natural_key)
    else:
        items = list(items)
        if len(set(items)) != len(items):
            raise DatabaseError("duplicate item labels")
    col = {lab: j for j, lab in enumerate(items)}
    mat = np.zeros((len(txns), len(items)), dtype=np.int8)
    for i, (_, members) in enumerate(txns):
        for it in members:
            if it not in col:
                raise DatabaseError(f"transaction item {it!r} not in item list")
            mat[i, col[it]] = 1
    return TransactionDatabase.from_matrix(mat.tolist(), items, labels)


def _parse_json(source: str) -> TransactionDatabase:
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise DatabaseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "matrix" not in data:
        raise DatabaseError('JSON database needs a "matrix" field')
    matrix = data["matrix"]
    if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
        raise DatabaseError("matrix must be a list of rows")
    for row in matrix:
        for v in row:
            if isinstance(v, bool) or v not in (0, 1):
                raise DatabaseError(f"non-binary matrix entry {v!r}")
    return TransactionDatabase.from_matrix(matrix, data.get("items"), data.get("transactions"))


def pad_to_power_of_two(db: TransactionDatabase) -> TransactionDatabase:
    rows, cols = db.shape
    n2, m2 = next_power_of_two(rows), next_power_of_two(cols)
    if (n2, m2) == (rows, cols):
        return db
    mat = np.zeros((n2, m2), dtype=np.int8)
    mat[:rows, :cols] = db.matrix
    extra_t = tuple(f"_pad_t{i}" for i in range(n2 - len(db.transaction_labels)))
    extra_i = tuple(f"_pad_i{j}" for j in range(m2 - len(db.item_labels)))
    return TransactionDatabase(
        mat,
        db.item_labels + extra_i,
        db.transaction_labels + extra_t,
        db.num_transactions,
        db.num_items,
        n2 - db.num_transactions,
        m2 - db.num_items,
    )


def _check_itemset(db: TransactionDatabase, itemset: Itemset) -> None:
    if not itemset:
        raise DatabaseError("empty itemset")
    if list(itemset) != sorted(set(itemset)):
        raise DatabaseError(f"itemset {itemset} must be strictly increasing")
    if itemset[0] < 0 or itemset[-1] >= db.num_items:
        raise DatabaseError(f"itemset {itemset} has indices outside 0..{db.num_items - 1}")


def support_count(db: TransactionDatabase, itemset: Itemset) -> int:
    _check_itemset(db, itemset)
    rows = db.matrix[: db.num_transactions, list(itemset)]
    return int(rows.all(axis=1).sum())


def support(db: TransactionDatabase, itemset: Itemset) -> Fraction:
    """Exact fraction of the original transactions containing ``itemset``."""
    if db.num_transactions == 0:
        raise DatabaseError("support is undefined for a database without transactions")
    return Fraction(support_count(db, itemset), db.num_transactions)


@dataclass
class FrequentSet:
    """Frequent itemsets grouped by cardinality, with exact supports."""

    levels: dict[int, dict[Itemset, Fraction]] = field(default_factory=dict)

    def add(self, itemset: Itemset, value: Fraction) -> None:
        self.levels.setdefault(len(itemset), {})[itemset] = value

    def itemsets(self) -> set[Itemset]:
        return {x for lvl in self.levels.values() for x in lvl}

    def supports(self) -> dict[Itemset, Fraction]:
        return {x: s for lvl in self.levels.values() for x, s in lvl.items()}

    def level(self, k: int) -> list[Itemset]:
        return sorted(self.levels.get(k, {}))

    def __len__(self) -> int:
        return sum(len(lvl) for lvl in self.levels.values())

    def to_dict(self, db: TransactionDatabase | None = None) -> dict:
        rows = []
        for x, s in sorted(self.supports().items(), key=lambda kv: (len(kv[0]), kv[0])):
            rows.append(
                {
                    "itemset": list(db.labels_of(x)) if db is not None else list(x),
                    "indices": list(x),
                    "support": f"{s.numerator}/{s.denominator}",
                    "support_float": float(s),
                }
            )
        return {"frequent_itemsets": rows}

    @classmethod
    def from_dict(cls, data: dict) -> FrequentSet:
        fs = cls()
        for row in data["frequent_itemsets"]:
            fs.add(tuple(row["indices"]), Fraction(row["support"]))
        return fs


def generate_candidates(frequent_k: Sequence[Itemset]) -> list[Itemset]:
    """Join frequent k-itemsets sharing a (k-1)-prefix, then prune by subsets."""
    freq = sorted(set(tuple(x) for x in frequent_k))
    if not freq:
        return []
    sizes = {len(x) for x in freq}
    if len(sizes) != 1:
        raise DatabaseError(f"mixed itemset cardinalities {sorted(sizes)}")
    k = sizes.pop()
    known = set(freq)
    out = []
    for a, b in itertools.combinations(freq, 2):
        if a[:-1] != b[:-1]:
            continue
        cand = a + (b[-1],)
        if all(sub in known for sub in itertools.combinations(cand, k)):
            out.append(cand)
    return sorted(set(out))


def apriori_mine(db: TransactionDatabase, s_min: float | Fraction) -> FrequentSet:
    if not 0 < s_min <= 1:
        raise DatabaseError(f"s_min must lie in (0, 1], got {s_min}")
    threshold = Fraction(s_min) if isinstance(s_min, Fraction) else Fraction(str(s_min))
    result = FrequentSet()
    candidates: list[Itemset] = [(j,) for j in range(db.num_items)]
    while candidates:
        frequent = []
        for x in candidates:
            s = support(db, x)
            if s >= threshold:
                result.add(x, s)
                frequent.append(x)
        candidates = generate_candidates(frequent)
    return result
