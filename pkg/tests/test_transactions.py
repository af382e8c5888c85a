import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qarm.transactions import (
    DatabaseError,
    FrequentSet,
    TransactionDatabase,
    apriori_mine,
    generate_candidates,
    pad_to_power_of_two,
    parse_database,
    support,
    support_count,
)

from conftest import D4_MATRIX


def binary_matrices(max_rows=8, max_cols=8, min_rows=1, min_cols=1):
    return st.integers(min_rows, max_rows).flatmap(
        lambda n: st.integers(min_cols, max_cols).flatmap(
            lambda m: st.lists(st.lists(st.integers(0, 1), min_size=m, max_size=m), min_size=n, max_size=n)
        )
    )


def brute_force(db, s_min):
    threshold = Fraction(str(s_min))
    out = {}
    for k in range(1, db.num_items + 1):
        for x in itertools.combinations(range(db.num_items), k):
            s = support(db, x)
            if s >= threshold:
                out[x] = s
    return out


# -- parsing -------------------------------------------------------------------


def test_parse_csv_two_by_two():
    db = parse_database("T0,I1 \n T1,I0,I1", items=["I0", "I1"])
    assert db.matrix.tolist() == [[0, 1], [1, 1]]
    assert db.item_labels == ("I0", "I1")
    assert db.transaction_labels == ("T0", "T1")


def test_parse_csv_infers_items_in_natural_order():
    db = parse_database("T0,I10,I2\nT1,I1")
    assert db.item_labels == ("I1", "I2", "I10")
    assert db.matrix.tolist() == [[0, 1, 1], [1, 0, 0]]


def test_csv_transaction_without_items_is_zero_row():
    db = parse_database("T0,I0\nT1\nT2,I0,I1")
    assert db.matrix.tolist() == [[1, 0], [0, 0], [1, 1]]


def test_parse_json_d4():
    src = json.dumps({"items": ["I0", "I1", "I2", "I3"], "matrix": D4_MATRIX})
    db = parse_database(src, "json-matrix")
    assert db.shape == (4, 4)
    assert db.matrix.tolist() == D4_MATRIX


@pytest.mark.parametrize(
    "source, fmt",
    [
        ("T0,I0\nT0,I1", "csv-transactions"),
        ('{"items": ["a", "a"], "matrix": [[1, 0]]}', "json-matrix"),
        ('{"matrix": [[1, 2]]}', "json-matrix"),
        ('{"matrix": [[1, 0], [1]]}', "json-matrix"),
        ('{"matrix": [[true, 0]]}', "json-matrix"),
        ('{"items": ["a"]}', "json-matrix"),
        ("not json", "json-matrix"),
    ],
)
def test_parse_errors(source, fmt):
    with pytest.raises(DatabaseError):
        parse_database(source, fmt)


def test_unknown_item_with_explicit_list():
    with pytest.raises(DatabaseError):
        parse_database("T0,I0,I9", items=["I0", "I1"])


def test_unknown_format():
    with pytest.raises(DatabaseError):
        parse_database("", "xml")


def test_matrix_is_read_only(d4):
    with pytest.raises(ValueError):
        d4.matrix[0, 0] = 0


def test_json_round_trip(d4):
    back = parse_database(d4.to_json(), "json-matrix")
    assert back == d4
    assert back != pad_to_power_of_two(TransactionDatabase.from_matrix([[1, 0, 1]]))


# -- padding -------------------------------------------------------------------


def test_pad_two_by_two_unchanged(db2):
    assert pad_to_power_of_two(db2) is db2


def test_pad_three_by_four():
    db = TransactionDatabase.from_matrix([[1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 1, 1]])
    padded = pad_to_power_of_two(db)
    assert padded.shape == (4, 4)
    assert padded.padded_rows == 1 and padded.padded_cols == 0
    assert padded.matrix[3].tolist() == [0, 0, 0, 0]
    assert padded.num_transactions == 3


def test_pad_five_by_six_keeps_supports():
    rng = np.random.default_rng(0)
    db = TransactionDatabase.from_matrix(rng.integers(0, 2, size=(5, 6)).tolist())
    padded = pad_to_power_of_two(db)
    assert padded.shape == (8, 8)
    assert not padded.matrix[5:].any() and not padded.matrix[:, 6:].any()
    for k in range(1, 7):
        for x in itertools.combinations(range(6), k):
            assert support(padded, x) == support(db, x) == Fraction(support_count(db, x), 5)


# -- support -------------------------------------------------------------------


def test_support_two_by_two(db2):
    assert support(db2, (0,)) == Fraction(1, 2)
    assert support(db2, (1,)) == 1


@pytest.mark.parametrize("itemset, expected", [((1, 3), Fraction(1, 2)), ((0, 2), Fraction(3, 4)), ((0,), 1)])
def test_support_d4(d4, itemset, expected):
    assert support(d4, itemset) == expected


@pytest.mark.parametrize("bad", [(), (1, 0), (0, 0), (4,), (-1,)])
def test_support_rejects_bad_itemsets(d4, bad):
    with pytest.raises(DatabaseError):
        support(d4, bad)


def test_support_rejects_padded_item():
    db = pad_to_power_of_two(TransactionDatabase.from_matrix([[1, 1, 1]]))
    with pytest.raises(DatabaseError):
        support(db, (3,))


# -- apriori -------------------------------------------------------------------


def test_apriori_two_by_two(db2):
    result = apriori_mine(db2, 0.7)
    assert result.supports() == {(1,): Fraction(1)}


def test_apriori_full_threshold_d4(d4):
    assert apriori_mine(d4, 1.0).supports() == {(0,): Fraction(1)}


def test_apriori_all_zero():
    db = TransactionDatabase.from_matrix([[0, 0, 0], [0, 0, 0]])
    assert len(apriori_mine(db, 0.1)) == 0


@pytest.mark.parametrize("s_min", [0, -0.1, 1.01])
def test_apriori_rejects_threshold(d4, s_min):
    with pytest.raises(DatabaseError):
        apriori_mine(d4, s_min)


def test_apriori_threshold_is_inclusive(d4):
    assert (1, 3) in apriori_mine(d4, 0.5).itemsets()


def test_frequent_set_round_trip(d4):
    fs = apriori_mine(d4, 0.5)
    assert FrequentSet.from_dict(fs.to_dict(d4)).supports() == fs.supports()


# -- candidates ----------------------------------------------------------------


@pytest.mark.parametrize(
    "frequent, expected",
    [
        ([(0,), (1,), (3,)], [(0, 1), (0, 3), (1, 3)]),
        ([(0, 1), (0, 2)], []),
        ([(0, 1), (0, 2), (1, 2)], [(0, 1, 2)]),
        ([], []),
    ],
)
def test_generate_candidates(frequent, expected):
    assert generate_candidates(frequent) == expected


def test_generate_candidates_mixed_sizes():
    with pytest.raises(DatabaseError):
        generate_candidates([(0,), (0, 1)])


# -- properties ----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(binary_matrices())
def test_anti_monotone(matrix):
    db = TransactionDatabase.from_matrix(matrix)
    m = db.num_items
    for k in range(1, min(m, 3) + 1):
        for y in itertools.combinations(range(m), k):
            for r in range(1, k):
                for x in itertools.combinations(y, r):
                    assert support(db, x) >= support(db, y)


@settings(max_examples=80, deadline=None)
@given(binary_matrices(max_cols=6), st.sampled_from([0.1, 0.25, 1 / 3, 0.5, 0.75, 1.0]))
def test_apriori_complete(matrix, s_min):
    db = TransactionDatabase.from_matrix(matrix)
    result = apriori_mine(db, s_min)
    assert result.supports() == brute_force(db, s_min)
    # downward closure
    for x in result.itemsets():
        for r in range(1, len(x)):
            for sub in itertools.combinations(x, r):
                assert sub in result.itemsets()


@settings(max_examples=60, deadline=None)
@given(binary_matrices(max_rows=7, max_cols=7), st.sampled_from([0.2, 0.5, 0.8]))
def test_padding_neutral_for_mining(matrix, s_min):
    db = TransactionDatabase.from_matrix(matrix)
    padded = pad_to_power_of_two(db)
    assert padded.is_padded
    assert apriori_mine(padded, s_min).supports() == apriori_mine(db, s_min).supports()


@settings(max_examples=60, deadline=None)
@given(binary_matrices(max_cols=6), st.sampled_from([0.2, 0.4, 0.6]))
def test_candidates_cover_frequent_sets(matrix, s_min):
    db = TransactionDatabase.from_matrix(matrix)
    truth = brute_force(db, s_min)
    for k in range(1, db.num_items):
        level = [x for x in truth if len(x) == k]
        cands = set(generate_candidates(level))
        for y in (x for x in truth if len(x) == k + 1):
            assert y in cands
