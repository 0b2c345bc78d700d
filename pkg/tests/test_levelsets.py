"""Tests for level-set enumeration, labeling, and the label proposition."""

import math

import pytest

from quditdicke.levelsets import build_level_sets, verify_level_set_proposition
from quditdicke.suites import compositions


def test_unit_vectors_example():
    index = build_level_sets((1, 1, 1))
    assert index.elements(1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    for m in range(3):
        unit = tuple(1 if j == m else 0 for j in range(3))
        assert index.label(1, unit) == m


def test_level_zero_and_top():
    index = build_level_sets((2, 1, 3))
    assert index.elements(0) == ((0, 0, 0),)
    assert index.label(0, (0, 0, 0)) == 0
    assert index.cardinality(index.n) == 1
    assert index.elements(index.n) == ((2, 1, 3),)


def test_two_level_example():
    index = build_level_sets((2, 1))
    assert index.elements(1) == ((1, 0), (0, 1))
    assert index.elements(2) == ((2, 0), (1, 1))
    assert index.chi == 2  # middle level of n=3


def test_reverse_lex_is_descending_tuple_order():
    index = build_level_sets((2, 2, 1))
    for i in range(index.n + 1):
        elements = index.elements(i)
        assert list(elements) == sorted(elements, reverse=True)
        # labels invert the element list
        for j, a in enumerate(elements):
            assert index.element(i, j) == a


def test_membership_errors():
    index = build_level_sets((1, 1))
    with pytest.raises(ValueError):
        index.label(1, (2, 0))


def test_proposition_example():
    index = build_level_sets((1, 1, 1))
    assert index.label(1, (0, 1, 0)) == 1
    assert index.label(2, (1, 1, 0)) == 0  # bumping level 0 cannot raise the label


def test_proposition_single_level_chain():
    ok, witness = verify_level_set_proposition((5,))
    assert ok and witness is None


def test_proposition_equality_regimes():
    # i+1 <= k_0 forces equality; i+1 > k_0 forces strict drop
    index = build_level_sets((2, 1, 1))
    for i in range(index.n):
        for a in index.elements(i):
            if a[0] + 1 > 2:
                continue
            bumped = (a[0] + 1,) + a[1:]
            lhs = index.label(i + 1, bumped)
            rhs = index.label(i, a)
            if i + 1 <= 2:
                assert lhs == rhs
            else:
                assert lhs < rhs


def test_proposition_exhaustive_small():
    for n in range(1, 7):
        for d in range(1, 5):
            for kvec in compositions(n, d):
                ok, witness = verify_level_set_proposition(kvec)
                assert ok, (kvec, witness)


def test_cardinality_bounds():
    # stars-and-stripes: level i-1 holds at most C(i+d-2, i-1) elements,
    # i.e. the bounded count never exceeds the unbounded composition count
    for kvec in [(2, 2, 2), (3, 1, 2), (1, 1, 1, 1), (4, 4)]:
        index = build_level_sets(kvec)
        d = len(kvec)
        for i in range(1, index.n + 1):
            assert index.cardinality(i - 1) <= math.comb(i + d - 2, i - 1)


def test_chi_bound_for_flat_tail_family():
    # occupations (n - r*x, x, ..., x, 0, ..., 0) keep the bond dimension at most (x+1)^r
    for n, r, x, d in [(6, 2, 2, 4), (8, 1, 3, 3), (9, 2, 3, 5), (6, 3, 1, 5)]:
        head = n - r * x
        assert head > 0
        kvec = (head,) + (x,) * r + (0,) * (d - r - 1)
        index = build_level_sets(kvec)
        assert index.chi <= (x + 1) ** r


def test_export_shape():
    data = build_level_sets((1, 1)).to_dict()
    assert data["kvec"] == [1, 1]
    assert data["chi"] == 2
    assert data["levels"][1] == {"i": 1, "elements": [[1, 0], [0, 1]], "labels": [0, 1]}
