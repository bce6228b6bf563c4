"""Cells and subset classes of complete and incomplete binary sample spaces.

A cell is a 0-1 tuple of length k recording which of k binary features are
present.  The complete product (CP) contains all 2^k cells; the incomplete
product (IP) omits the all-zeros cell, so its cells correspond one-to-one
to the nonempty subsets of the feature set.  Everything downstream (design
matrices, model kernels, fitted distributions) is indexed by the canonical
cell order defined here: cells sorted by number of present features, then
lexicographically by the sorted index list of those features.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

Cell = tuple[int, ...]
FeatureSet = frozenset[int]

MAX_FEATURES = 24
# Dense (2^k - 1)-sized matrices are only materialized up to this many
# features; beyond it, use the vector transforms in :mod:`hasfit.param`.
MAX_DENSE_FEATURES = 14


def check_feature_count(k: int) -> None:
    if not isinstance(k, int) or not 1 <= k <= MAX_FEATURES:
        raise ValueError(f"feature count must be an integer in [1, {MAX_FEATURES}], got {k!r}")


def phi(cell: Cell) -> FeatureSet:
    """Set of feature indices marked present in the cell."""
    return frozenset(i for i, b in enumerate(cell) if b)


def cell_of(subset: FeatureSet, k: int) -> Cell:
    """Inverse of :func:`phi`: the cell whose present features are ``subset``."""
    return tuple(1 if i in subset else 0 for i in range(k))


def cell_label(cell: Cell) -> str:
    """Serialize a cell as a 0-1 string, first feature first (``(1,1,0)`` -> ``"110"``)."""
    return "".join("1" if b else "0" for b in cell)


def parse_cell_label(label: str, space: str = "IP") -> Cell:
    """Parse a 0-1 string label; the all-zeros label is rejected on IP."""
    if not label or any(ch not in "01" for ch in label):
        raise ValueError(f"cell label must match ^[01]{{k}}$, got {label!r}")
    cell = tuple(int(ch) for ch in label)
    if space == "IP" and not any(cell):
        raise ValueError(f"all-zeros cell {label!r} does not exist on IP")
    return cell


def revlex_subsets(k: int) -> list[FeatureSet]:
    """Nonempty feature subsets in canonical order (size ascending, then lex)."""
    check_feature_count(k)
    out: list[FeatureSet] = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(k), size):
            out.append(frozenset(combo))
    return out


def revlex_cells(k: int, space: str = "IP") -> list[Cell]:
    """IP cells in canonical order; the CP variant prepends the zero cell.

    The order puts cells with fewer present features first and the all-ones
    cell last, matching the column order of every design matrix built here.
    Note that the returned list has 2^k - 1 (IP) or 2^k (CP) entries.
    """
    _check_space(space)
    cells = [cell_of(s, k) for s in revlex_subsets(k)]
    if space == "CP":
        return [(0,) * k] + cells
    return cells


def cell_index(k: int, space: str = "IP") -> dict[Cell, int]:
    """Map each cell to its position in :func:`revlex_cells` order."""
    return {c: i for i, c in enumerate(revlex_cells(k, space))}


def _check_space(space: str) -> None:
    if space not in ("IP", "CP"):
        raise ValueError(f"space must be 'IP' or 'CP', got {space!r}")


@dataclass(frozen=True)
class SubsetClass:
    """An ascending or descending family of nonempty feature subsets.

    Ascending means closed under taking supersets within {1..k}; descending
    here means the complement of an ascending class within the nonempty
    subsets (so it is closed under nonempty subsets of its members, and the
    empty set is never a member).
    """

    kind: str  # "ascending" | "descending"
    members: frozenset[FeatureSet]
    k: int

    def __post_init__(self) -> None:
        check_feature_count(self.k)
        if self.kind not in ("ascending", "descending"):
            raise ValueError(f"kind must be 'ascending' or 'descending', got {self.kind!r}")
        for s in self.members:
            if not s:
                raise ValueError("subset classes never contain the empty set")
            if not s <= frozenset(range(self.k)):
                raise ValueError(f"subset {sorted(s)} out of range for k={self.k}")

    def minimal_elements(self) -> list[FeatureSet]:
        return _sorted_subsets(
            [s for s in self.members if not any(t < s for t in self.members)]
        )

    def maximal_elements(self) -> list[FeatureSet]:
        return _sorted_subsets(
            [s for s in self.members if not any(s < t for t in self.members)]
        )

    def is_closed(self) -> bool:
        """Testable closure predicate for the declared kind."""
        universe = revlex_subsets(self.k)
        if self.kind == "ascending":
            return all(t in self.members for s in self.members for t in universe if s <= t)
        return all(t in self.members for s in self.members for t in universe if t <= s)


def _sorted_subsets(subsets) -> list[FeatureSet]:
    return sorted(subsets, key=lambda s: (len(s), sorted(s)))


def ascending_classes(k: int, min_member_size: int = 1) -> list[SubsetClass]:
    """Every nonempty ascending class whose members have the given minimum size.

    Enumerated through antichains of minimal elements, so the cost scales
    with the number of classes rather than 2^(2^k - 1).  Returned in a
    deterministic order (class size, then member lists).
    """
    check_feature_count(k)
    elements = [s for s in revlex_subsets(k) if len(s) >= min_member_size]
    seen: set[frozenset[FeatureSet]] = set()

    def extend(start: int, antichain: list[FeatureSet]) -> None:
        if antichain:
            seen.add(frozenset(t for t in elements if any(s <= t for s in antichain)))
        for i in range(start, len(elements)):
            s = elements[i]
            if all(not (s <= t or t <= s) for t in antichain):
                antichain.append(s)
                extend(i + 1, antichain)
                antichain.pop()

    extend(0, [])
    ordered = sorted(seen, key=lambda m: (len(m), sorted(sorted(s) for s in m)))
    return [SubsetClass(kind="ascending", members=m, k=k) for m in ordered]


def ascending_closure(seeds, k: int) -> SubsetClass:
    """Smallest ascending class containing the given nonempty seed subsets."""
    check_feature_count(k)
    seeds = [frozenset(s) for s in seeds]
    if not seeds:
        raise ValueError("ascending closure needs at least one seed subset")
    if any(not s for s in seeds):
        raise ValueError("seed subsets must be nonempty")
    members = {t for t in revlex_subsets(k) if any(s <= t for s in seeds)}
    return SubsetClass(kind="ascending", members=frozenset(members), k=k)


def descending_complement(asc: SubsetClass) -> SubsetClass:
    """Complement of an ascending class within the nonempty subsets."""
    if asc.kind != "ascending":
        raise ValueError("descending_complement expects an ascending class")
    members = frozenset(s for s in revlex_subsets(asc.k) if s not in asc.members)
    return SubsetClass(kind="descending", members=members, k=asc.k)


@dataclass(frozen=True)
class ParitySplit:
    """Cells below a reference subset, split by the parity of their size.

    ``same_parity`` holds the cells j with phi(j) contained in the reference
    whose number of present features has the same parity as the reference
    size; the cell equal to the reference itself is always in that list.
    """

    same_parity: tuple[Cell, ...]
    diff_parity: tuple[Cell, ...]
    reference: FeatureSet


def parity_split(reference, k: int) -> ParitySplit:
    """Partition the nonempty sub-cells of ``reference`` by size parity."""
    check_feature_count(k)
    ref = frozenset(reference)
    if not ref:
        raise ValueError("reference subset must be nonempty")
    if not ref <= frozenset(range(k)):
        raise ValueError(f"reference {sorted(ref)} out of range for k={k}")
    same: list[Cell] = []
    diff: list[Cell] = []
    for size in range(1, len(ref) + 1):
        for combo in itertools.combinations(sorted(ref), size):
            cell = cell_of(frozenset(combo), k)
            if (len(ref) - size) % 2 == 0:
                same.append(cell)
            else:
                diff.append(cell)
    return ParitySplit(same_parity=tuple(same), diff_parity=tuple(diff), reference=ref)
