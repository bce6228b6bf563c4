"""Corner, mean-value, and mixed parameterizations on IP and CP.

The subset-containment design matrix S (T on the complete space) links the
three coordinate systems used throughout:

* corner parameters  beta = (S')^{-1} log p, which are log cell
  probabilities for singleton subsets and log conditional ratios otherwise;
* mean-value parameters mu = S p, the subset sums;
* the mixed split (A p, D' log p) induced by an ascending class.

S is unit upper triangular in the canonical cell order, and its inverse has
the closed form (+/-1 by set-difference parity), so no numeric inversion
ever happens: all matrix identities here are exact in integer arithmetic.
Ratio computations run on the log scale, since parity products can involve
up to 2^(k-1) factors and would underflow doubles quickly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import exp, log

import numpy as np

from .lattice import (
    MAX_DENSE_FEATURES,
    Cell,
    FeatureSet,
    SubsetClass,
    cell_label,
    check_feature_count,
    descending_complement,
    parity_split,
    revlex_cells,
    revlex_subsets,
)

NORMALIZATION_TOL = 1e-8

FEATURE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWX"


def subset_name(subset: FeatureSet, features: str | list[str] = FEATURE_LETTERS) -> str:
    """Human-readable subset name, e.g. frozenset({0, 2}) -> "AC"; empty -> "-"."""
    if not subset:
        return "-"
    return "".join(features[i] for i in sorted(subset))


@dataclass(frozen=True)
class DesignMatrix:
    """0-1 indicator matrix over (feature subset, cell) pairs.

    Entry (j, i) is 1 iff the row subset is contained in phi of the column
    cell.  Rows may include the empty subset, whose indicator row is all
    ones (the overall effect on IP) plus the zero-cell column on CP.
    """

    rows: tuple[FeatureSet, ...]
    cols: tuple[Cell, ...]
    entries: np.ndarray
    space: str

    def __post_init__(self) -> None:
        if self.entries.shape != (len(self.rows), len(self.cols)):
            raise ValueError("entry array shape does not match row/col labels")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def toarray(self, dtype=np.int64) -> np.ndarray:
        return self.entries.astype(dtype)

    def dump(self, features: str | list[str] = FEATURE_LETTERS) -> str:
        """Row-major integer dump with subset/cell headers, stable across runs."""
        header = "rows\\cols " + " ".join(cell_label(c) for c in self.cols)
        lines = [header]
        width = max(len(cell_label(c)) for c in self.cols)
        for name, row in zip(self.rows, self.entries):
            cells = " ".join(str(int(v)).rjust(width) for v in row)
            lines.append(f"{subset_name(name, features):>9} {cells}")
        return "\n".join(lines)


def _check_dense(k: int) -> None:
    check_feature_count(k)
    if k > MAX_DENSE_FEATURES:
        raise ValueError(
            f"dense design matrices are limited to k <= {MAX_DENSE_FEATURES}; "
            f"use the subset-sum transforms for k = {k}"
        )


def _masks(subsets) -> np.ndarray:
    return np.array([sum(1 << i for i in s) for s in subsets], dtype=np.uint32)


def build_design(k: int, space: str = "IP") -> DesignMatrix:
    """The containment design matrix S (IP) or T (CP, with overall-effect row)."""
    _check_dense(k)
    subsets = revlex_subsets(k)
    cells = revlex_cells(k, space)
    row_sets: list[FeatureSet] = list(subsets)
    if space == "CP":
        row_sets = [frozenset()] + row_sets
    rm = _masks(row_sets)
    cm = _masks(frozenset(i for i, b in enumerate(c) if b) for c in cells)
    entries = ((rm[:, None] & cm[None, :]) == rm[:, None]).astype(np.int8)
    return DesignMatrix(rows=tuple(row_sets), cols=tuple(cells), entries=entries, space=space)


def invert_corner(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form inverse pair ((S')^{-1}, S^{-1}) as exact integer arrays.

    The (i, j) entry of (S')^{-1} is (-1)^{|phi(i) \\ phi(j)|} when
    phi(j) is contained in phi(i), else 0; its transpose is S^{-1}.
    """
    _check_dense(k)
    m = _masks(revlex_subsets(k))
    contains = (m[:, None] & m[None, :]) == m[None, :]
    diff_size = np.bitwise_count(m[:, None] & ~m[None, :])
    st_inv = np.where(contains, np.where(diff_size % 2 == 0, 1, -1), 0).astype(np.int64)
    return st_inv, st_inv.T


def _validate_distribution(p, n: int, what: str = "distribution"):
    p = list(p)
    if len(p) != n:
        raise ValueError(f"{what} has {len(p)} entries, expected {n}")
    if any(x <= 0 for x in p):
        raise ValueError(f"{what} must be strictly positive")
    total = float(sum(p))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"{what} sums to {total}, not 1 within {NORMALIZATION_TOL}")
    return p


def _infer_k(n_cells: int, space: str) -> int:
    full = n_cells if space == "CP" else n_cells + 1
    k = full.bit_length() - 1
    if 2**k != full:
        raise ValueError(f"vector of length {n_cells} does not match any {space} cell count")
    return k


def _to_mask_order(x, k: int, space: str) -> list:
    """Re-index a canonical-order vector by feature bitmask; empty mask slot is 0 on IP."""
    out = [0] * (2**k)
    vals = list(x)
    if space == "CP":
        out[0] = vals[0]
        vals = vals[1:]
    for m, v in zip(_masks(revlex_subsets(k)), vals):
        out[int(m)] = v
    return out


def _from_mask_order(x, k: int, space: str) -> list:
    vals = [x[int(m)] for m in _masks(revlex_subsets(k))]
    if space == "CP":
        return [x[0]] + vals
    return vals


def _superset_zeta(x: list, k: int) -> list:
    """In-place style superset sums: out[m] = sum over masks containing m."""
    x = list(x)
    for b in range(k):
        bit = 1 << b
        for m in range(2**k):
            if not m & bit:
                x[m] = x[m] + x[m | bit]
    return x


def _superset_moebius(x: list, k: int) -> list:
    x = list(x)
    for b in range(k):
        bit = 1 << b
        for m in range(2**k):
            if not m & bit:
                x[m] = x[m] - x[m | bit]
    return x


def _subset_moebius(x: list, k: int) -> list:
    """out[m] = alternating subset sum: sum_{w <= m} (-1)^{|m \\ w|} x[w]."""
    x = list(x)
    for b in range(k):
        bit = 1 << b
        for m in range(2**k):
            if m & bit:
                x[m] = x[m] - x[m ^ bit]
    return x


@dataclass(frozen=True)
class CornerParams:
    """Log-scale corner parameters keyed by feature subset."""

    beta: dict[FeatureSet, float]
    space: str = "IP"

    def vector(self, k: int) -> np.ndarray:
        subsets = revlex_subsets(k)
        if self.space == "CP":
            subsets = [frozenset()] + subsets
        return np.array([self.beta[s] for s in subsets])


@dataclass(frozen=True)
class MeanParams:
    """Subset sums (mean-value parameters) keyed by feature subset."""

    mu: dict[FeatureSet, float]
    space: str = "IP"

    def vector(self, k: int) -> list:
        subsets = revlex_subsets(k)
        if self.space == "CP":
            subsets = [frozenset()] + subsets
        return [self.mu[s] for s in subsets]


@dataclass(frozen=True)
class ExtendedMean:
    """Non-identified split (nu1, nu2) of the subset-sum vector: nu1 * nu2 = A p."""

    nu1: float
    nu2: np.ndarray


def corner_params(p, k: int | None = None, space: str = "IP") -> CornerParams:
    """Corner parameters beta = (S')^{-1} log p of a positive distribution.

    On IP, singleton entries are log cell probabilities and every other
    entry is the log of the zero-conditioned generalized ratio of its
    subset.  On CP the empty-set entry (overall effect) is log p(zero cell).
    """
    if k is None:
        k = _infer_k(len(list(p)), space)
    n = 2**k if space == "CP" else 2**k - 1
    p = _validate_distribution(p, n)
    logs = [log(float(x)) for x in p]
    beta_mask = _subset_moebius(_to_mask_order(logs, k, space), k)
    subsets = revlex_subsets(k)
    beta = {s: beta_mask[sum(1 << i for i in s)] for s in subsets}
    if space == "CP":
        beta[frozenset()] = beta_mask[0]
    return CornerParams(beta=beta, space=space)


def mean_params(p, k: int | None = None, space: str = "IP") -> MeanParams:
    """Subset sums mu = S p; exact when fed exact (rational) probabilities."""
    if k is None:
        k = _infer_k(len(list(p)), space)
    n = 2**k if space == "CP" else 2**k - 1
    p = _validate_distribution(p, n)
    sums = _superset_zeta(_to_mask_order(p, k, space), k)
    subsets = revlex_subsets(k)
    mu = {s: sums[sum(1 << i for i in s)] for s in subsets}
    if space == "CP":
        mu[frozenset()] = sums[0]
    return MeanParams(mu=mu, space=space)


def probs_from_mean(mu, k: int, space: str = "IP") -> list:
    """Inverse of :func:`mean_params`: p = S^{-1} mu, exact for exact inputs.

    Accepts a MeanParams or a vector in canonical subset order.
    """
    vec = mu.vector(k) if isinstance(mu, MeanParams) else list(mu)
    n = 2**k if space == "CP" else 2**k - 1
    if len(vec) != n:
        raise ValueError(f"mean vector has {len(vec)} entries, expected {n}")
    return _from_mask_order(_superset_moebius(_to_mask_order(vec, k, space), k), k, space)


def generalized_ratio(p, subset, conditioning: str = "zero", k: int | None = None) -> float:
    """Generalized odds ratio of a feature subset on an IP distribution.

    ``zero``: ratio of parity products over the cells below the subset, all
    other features absent (the full feature set gives the top-order ratio).
    ``one``: odds ratio in the 2^|V| slice where every feature outside the
    subset is present, oriented so cells whose present-feature count within
    the slice matches |V|'s parity go to the numerator.
    """
    if k is None:
        k = _infer_k(len(list(p)), "IP")
    p = _validate_distribution(p, 2**k - 1)
    V = frozenset(subset)
    if not V:
        raise ValueError("subset must be nonempty")
    if not V <= frozenset(range(k)):
        raise ValueError(f"subset {sorted(V)} out of range for k={k}")
    index = {c: i for i, c in enumerate(revlex_cells(k))}
    logs = [log(float(x)) for x in p]

    if conditioning == "zero":
        split = parity_split(V, k)
        num = sum(logs[index[c]] for c in split.same_parity)
        den = sum(logs[index[c]] for c in split.diff_parity)
        return exp(num - den)

    if conditioning == "one":
        if len(V) < 2:
            raise ValueError("one-conditioning needs a subset of at least two features")
        ones = frozenset(range(k)) - V
        if not ones:
            raise ValueError("one-conditioning of the full feature set needs the zero cell")
        num = den = 0.0
        for size in range(len(V) + 1):
            for combo in itertools.combinations(sorted(V), size):
                cell = tuple(1 if (i in ones or i in combo) else 0 for i in range(k))
                if (len(V) - size) % 2 == 0:
                    num += logs[index[cell]]
                else:
                    den += logs[index[cell]]
        return exp(num - den)

    raise ValueError(f"conditioning must be 'zero' or 'one', got {conditioning!r}")


def mixed_split(k: int, asc: SubsetClass) -> tuple[DesignMatrix, np.ndarray]:
    """Design rows of the descending complement and the matching kernel basis.

    Returns (A, D): A holds the rows of S for the complement of the
    ascending class, and D the columns of the closed-form S^{-1} indexed by
    the ascending class, so A @ D == 0 exactly.
    """
    _check_dense(k)
    if asc.kind != "ascending" or asc.k != k:
        raise ValueError("mixed_split expects an ascending class over the same k")
    if not asc.is_closed():
        raise ValueError("class is not ascending (not closed under supersets)")
    subsets = revlex_subsets(k)
    if not asc.members:
        raise ValueError("ascending class is empty: D would have no columns")
    if len(asc.members) == len(subsets):
        raise ValueError("ascending class is exhaustive: A would have no rows")
    des_rows = [s for s in subsets if s not in asc.members]
    asc_cols = [s for s in subsets if s in asc.members]

    S = build_design(k, "IP")
    keep = [i for i, s in enumerate(subsets) if s not in asc.members]
    A = DesignMatrix(
        rows=tuple(des_rows),
        cols=S.cols,
        entries=S.entries[keep, :],
        space="IP",
    )
    _, s_inv = invert_corner(k)
    col_pos = {s: i for i, s in enumerate(subsets)}
    D = s_inv[:, [col_pos[s] for s in asc_cols]]
    return A, D


def extended_mean(p, design, scale_hint: float) -> ExtendedMean:
    """Split the subset sums A p into (nu1, nu2) with nu1 = scale_hint.

    The split is non-identified by construction; nu1 * nu2 reconstructs
    A p exactly for any positive scale hint.
    """
    if scale_hint <= 0:
        raise ValueError("scale_hint must be positive")
    A = design.toarray(np.float64) if isinstance(design, DesignMatrix) else np.asarray(design, dtype=np.float64)
    subset_sums = A @ np.asarray(list(p), dtype=np.float64)
    return ExtendedMean(nu1=float(scale_hint), nu2=subset_sums / float(scale_hint))
