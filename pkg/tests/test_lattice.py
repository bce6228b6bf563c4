import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hasfit.lattice import (
    SubsetClass,
    ascending_classes,
    ascending_closure,
    cell_label,
    descending_complement,
    parity_split,
    parse_cell_label,
    phi,
    revlex_cells,
    revlex_subsets,
)

K3_ORDER = [
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (1, 1, 0), (1, 0, 1), (0, 1, 1),
    (1, 1, 1),
]


def test_revlex_cells_k3():
    assert revlex_cells(3) == K3_ORDER


def test_revlex_cells_k1_and_k2():
    assert revlex_cells(1) == [(1,)]
    assert revlex_cells(2) == [(1, 0), (0, 1), (1, 1)]


def test_revlex_cells_cp_prepends_zero_cell():
    cells = revlex_cells(3, "CP")
    assert cells[0] == (0, 0, 0)
    assert cells[1:] == K3_ORDER


@pytest.mark.parametrize("k", [0, -1, 25])
def test_feature_count_range(k):
    with pytest.raises(ValueError):
        revlex_cells(k)


@given(st.integers(min_value=1, max_value=10))
def test_revlex_bijection_and_full_set_last(k):
    cells = revlex_cells(k)
    assert len(cells) == 2**k - 1
    subsets = {phi(c) for c in cells}
    assert len(subsets) == len(cells)
    assert frozenset() not in subsets
    assert phi(cells[-1]) == frozenset(range(k))
    # sizes never decrease along the order
    sizes = [len(phi(c)) for c in cells]
    assert sizes == sorted(sizes)


def test_ascending_closure_pair_seed():
    asc = ascending_closure([{0, 1}], 3)
    assert asc.members == frozenset({frozenset({0, 1}), frozenset({0, 1, 2})})
    des = descending_complement(asc)
    assert des.maximal_elements() == [frozenset({0, 2}), frozenset({1, 2})]


def test_ascending_closure_top_seed():
    asc = ascending_closure([{0, 1, 2}], 3)
    assert asc.members == frozenset({frozenset({0, 1, 2})})
    des = descending_complement(asc)
    assert des.maximal_elements() == [
        frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})
    ]


def test_ascending_closure_singleton_seed_k2():
    asc = ascending_closure([{0}], 2)
    assert asc.members == frozenset({frozenset({0}), frozenset({0, 1})})


def test_ascending_closure_errors():
    with pytest.raises(ValueError):
        ascending_closure([], 3)
    with pytest.raises(ValueError):
        ascending_closure([set()], 3)


@st.composite
def seeds_and_k(draw):
    k = draw(st.integers(min_value=1, max_value=6))
    n_seeds = draw(st.integers(min_value=1, max_value=3))
    seeds = [
        frozenset(draw(st.sets(st.integers(0, k - 1), min_size=1, max_size=k)))
        for _ in range(n_seeds)
    ]
    return seeds, k


@given(seeds_and_k())
def test_closure_is_ascending_and_complement_descending(data):
    seeds, k = data
    asc = ascending_closure(seeds, k)
    assert asc.is_closed()
    assert all(s in asc.members for s in seeds)
    des = descending_complement(asc)
    assert des.is_closed()
    # complement plus class plus the empty set reconstitutes the power set
    union = set(asc.members) | set(des.members) | {frozenset()}
    assert union == {frozenset(s) for r in range(k + 1)
                     for s in itertools.combinations(range(k), r)}
    assert not (asc.members & des.members)


def test_parity_split_full_set_k3():
    split = parity_split({0, 1, 2}, 3)
    assert set(split.same_parity) == {(1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1)}
    assert set(split.diff_parity) == {(1, 1, 0), (1, 0, 1), (0, 1, 1)}


def test_parity_split_pair_k3():
    split = parity_split({0, 1}, 3)
    assert set(split.same_parity) == {(1, 1, 0)}
    assert set(split.diff_parity) == {(1, 0, 0), (0, 1, 0)}


def test_parity_split_singleton():
    split = parity_split({0}, 1)
    assert split.same_parity == ((1,),)
    assert split.diff_parity == ()


def test_parity_split_reference_cell_always_same_parity():
    split = parity_split({1, 3}, 4)
    assert (0, 1, 0, 1) in split.same_parity


def test_parity_split_errors():
    with pytest.raises(ValueError):
        parity_split(set(), 3)
    with pytest.raises(ValueError):
        parity_split({5}, 3)


@st.composite
def reference_and_k(draw):
    k = draw(st.integers(min_value=1, max_value=10))
    ref = frozenset(draw(st.sets(st.integers(0, k - 1), min_size=1, max_size=k)))
    return ref, k


@given(reference_and_k())
@settings(max_examples=200)
def test_parity_count_difference_is_one(data):
    # alternating binomial sum: |same| - |diff| = -(-1)^{|ref|}, so the two
    # parity classes always differ in size by exactly one
    ref, k = data
    split = parity_split(ref, k)
    assert len(split.same_parity) - len(split.diff_parity) == -((-1) ** len(ref))
    assert len(split.same_parity) + len(split.diff_parity) == 2 ** len(ref) - 1


def test_cell_labels_round_trip():
    for cell in revlex_cells(4):
        assert parse_cell_label(cell_label(cell)) == cell


def test_zero_label_rejected_on_ip():
    with pytest.raises(ValueError):
        parse_cell_label("000")
    assert parse_cell_label("000", space="CP") == (0, 0, 0)
    with pytest.raises(ValueError):
        parse_cell_label("01x")
    with pytest.raises(ValueError):
        parse_cell_label("")


def test_subset_class_validation():
    with pytest.raises(ValueError):
        SubsetClass(kind="sideways", members=frozenset(), k=3)
    with pytest.raises(ValueError):
        SubsetClass(kind="ascending", members=frozenset({frozenset()}), k=3)
    not_closed = SubsetClass(kind="ascending", members=frozenset({frozenset({0})}), k=2)
    assert not not_closed.is_closed()


def test_ascending_classes_enumeration_counts():
    # antichain counts over the nonempty subsets: 4 at k=2, 18 at k=3
    assert len(ascending_classes(2)) == 4
    assert len(ascending_classes(3)) == 18
    assert len(ascending_classes(3, min_member_size=2)) == 8
    for asc in ascending_classes(3):
        assert asc.is_closed()
