"""HAS, quasi-log-linear, and log-linear model objects.

A model is generated by an ascending class of feature subsets.  The rows of
the containment matrix S indexed by the complementary descending class give
the HAS design matrix A on IP; stacking an all-ones row yields the quasi
model's design A1; adding the zero-cell column as well gives the log-linear
design A0 on CP.  Integer kernel bases are built so that the three model
kinds stay aligned: the quasi kernel is extended by a single
non-homogeneous vector to give the HAS kernel, whose homogenization (an
extra zero-cell coordinate balancing each vector) is the log-linear kernel.
Binomial generators read the kernel vectors as p^(d+) - p^(d-); they form a
lattice basis, which characterizes strictly positive member distributions
but is not claimed to be a Markov basis.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass

import numpy as np

from . import exact
from .lattice import (
    Cell,
    FeatureSet,
    SubsetClass,
    ascending_closure,
    cell_label,
    check_feature_count,
    phi,
    revlex_cells,
    revlex_subsets,
)
from .param import FEATURE_LETTERS, DesignMatrix, build_design, subset_name

MODEL_KINDS = ("has", "qll", "ll")

_BRACKET_RE = re.compile(r"\[([A-Za-z]+)\]")


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus the generating ascending class."""

    k: int
    kind: str
    asc: SubsetClass

    def __post_init__(self) -> None:
        check_feature_count(self.k)
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.asc.kind != "ascending" or self.asc.k != self.k:
            raise ValueError("spec needs an ascending class over the same feature count")
        if not self.asc.members:
            raise ValueError("ascending class must be nonempty")
        if not self.asc.is_closed():
            raise ValueError("generating class is not ascending")
        if self.kind in ("has", "ll") and len(self.asc.members) == 2**self.k - 1:
            raise ValueError(f"{self.kind} model needs a proper ascending class")

    @property
    def descending(self) -> list[FeatureSet]:
        return [s for s in revlex_subsets(self.k) if s not in self.asc.members]

    def generating_string(self, features: str | list[str] = FEATURE_LETTERS) -> str:
        """Bracket notation over the maximal descending-class elements."""
        des = SubsetClass(kind="descending", members=frozenset(self.descending), k=self.k)
        maximal = des.maximal_elements()
        if not maximal:
            return "[]"
        return "".join("[" + subset_name(s, features) + "]" for s in maximal)


def ascending_from_brackets(text: str, k: int | None = None,
                            features: str = FEATURE_LETTERS) -> SubsetClass:
    """Parse bracket notation like "[AC][BC]" into the ascending class.

    The brackets name the maximal elements of the descending class; the
    ascending class is the complement of their downward closure.  When k is
    not given it is inferred from the highest feature letter used.
    """
    groups = _BRACKET_RE.findall(text)
    if not groups or "".join(f"[{g}]" for g in groups) != text.replace(" ", ""):
        raise ValueError(f"model string must look like [AC][BC], got {text!r}")
    sets = []
    for g in groups:
        idx = set()
        for ch in g.upper():
            pos = features.find(ch)
            if pos < 0:
                raise ValueError(f"unknown feature letter {ch!r} in {text!r}")
            idx.add(pos)
        sets.append(frozenset(idx))
    needed = max(max(s) for s in sets) + 1
    if k is None:
        k = needed
    elif needed > k:
        raise ValueError(f"model string {text!r} uses features beyond k={k}")
    descending = {t for s in sets for t in _nonempty_subsets(s)}
    members = frozenset(s for s in revlex_subsets(k) if s not in descending)
    if not members:
        raise ValueError(f"model string {text!r} leaves no ascending class (saturated)")
    return SubsetClass(kind="ascending", members=members, k=k)


def _nonempty_subsets(s: FeatureSet):
    for size in range(1, len(s) + 1):
        for combo in itertools.combinations(sorted(s), size):
            yield frozenset(combo)


def parse_model_string(text: str, k: int | None = None,
                       features: str = FEATURE_LETTERS) -> SubsetClass:
    """Parse either bracket notation or a JSON list of ascending-class seeds.

    Bracket notation names the generating class ("[AC][BC]"); a JSON list
    gives the minimal elements of the ascending class directly, each as a
    letter string or a list of letters / feature indices
    (e.g. ``[["A","B"],["A","B","C"]]`` or ``["AB"]``).
    """
    text = text.strip()
    if _BRACKET_RE.match(text):
        return ascending_from_brackets(text, k=k, features=features)
    try:
        doc = json.loads(text)
    except ValueError:
        raise ValueError(f"model string {text!r} is neither bracket notation nor JSON") from None
    if not isinstance(doc, list) or not doc:
        raise ValueError("JSON model spec must be a nonempty list of subsets")
    seeds = []
    for item in doc:
        if isinstance(item, str):
            labels = list(item)
        elif isinstance(item, list):
            labels = item
        else:
            raise ValueError(f"cannot read subset spec {item!r}")
        idx = set()
        for lab in labels:
            if isinstance(lab, int):
                idx.add(lab)
            else:
                pos = features.find(str(lab).upper())
                if pos < 0:
                    raise ValueError(f"unknown feature letter {lab!r}")
                idx.add(pos)
        seeds.append(frozenset(idx))
    if k is None:
        k = max(max(s) for s in seeds) + 1
    return ascending_closure(seeds, k)


@dataclass(frozen=True)
class Model:
    """A built model: design matrix, integer kernel basis, and bookkeeping."""

    spec: ModelSpec
    design: DesignMatrix
    kernel: np.ndarray
    df: int
    overall_effect: bool

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def space(self) -> str:
        return self.design.space


def build_model(spec: ModelSpec) -> Model:
    """Construct the design matrix and integer kernel basis for a spec."""
    k = spec.k
    subsets = revlex_subsets(k)
    S = build_design(k, "IP")
    keep = [i for i, s in enumerate(subsets) if s not in spec.asc.members]
    A = S.entries[keep, :].astype(np.int64)
    des_rows = tuple(subsets[i] for i in keep)
    n = A.shape[1]

    ones = np.ones((1, n), dtype=np.int64)
    A1 = np.vstack([ones, A]) if A.size else ones
    qll_kernel, qll_free = exact.kernel_basis(A1)

    if spec.kind == "qll":
        design = DesignMatrix(
            rows=(frozenset(),) + des_rows, cols=S.cols,
            entries=A1.astype(np.int8), space="IP",
        )
        kernel, df = qll_kernel, len(spec.asc.members) - 1
        overall = True
    else:
        has_kernel_rows, has_free = exact.kernel_basis(A)
        extra_col = next(c for c in has_free if c not in qll_free)
        merged = {c: qll_kernel[i] for i, c in enumerate(qll_free)}
        merged[extra_col] = has_kernel_rows[has_free.index(extra_col)]
        kernel = np.array([merged[c] for c in sorted(merged)], dtype=np.int64)
        df = len(spec.asc.members)
        if spec.kind == "has":
            design = DesignMatrix(rows=des_rows, cols=S.cols,
                                  entries=A.astype(np.int8), space="IP")
            overall = False
        else:  # ll
            cp_cells = tuple(revlex_cells(k, "CP"))
            top = np.ones((1, n + 1), dtype=np.int8)
            block = np.hstack([np.zeros((len(des_rows), 1), dtype=np.int8),
                               A.astype(np.int8)])
            design = DesignMatrix(rows=(frozenset(),) + des_rows, cols=cp_cells,
                                  entries=np.vstack([top, block]), space="CP")
            # homogenize each kernel vector with a balancing zero-cell coordinate
            kernel = np.hstack([-kernel.sum(axis=1, keepdims=True), kernel])
            overall = True

    if kernel.shape[0] != df:
        raise RuntimeError(
            f"kernel dimension {kernel.shape[0]} does not match df {df} "
            f"for {spec.kind} {spec.generating_string()}"
        )
    return Model(spec=spec, design=design, kernel=kernel, df=df, overall_effect=overall)


def parity_witness(k: int) -> np.ndarray:
    """Vector over IP cells: +1 where the present-feature count has k's parity, else -1.

    Lies in the kernel of every HAS design matrix and has nonzero entry sum,
    witnessing the absence of the overall effect.
    """
    check_feature_count(k)
    return np.array(
        [1 if (len(phi(c)) - k) % 2 == 0 else -1 for c in revlex_cells(k)],
        dtype=np.int64,
    )


def has_overall_effect(design: DesignMatrix) -> bool:
    """Exact test whether the all-ones row lies in the rational row space.

    Requires a full-row-rank design.  For HAS-shaped designs (IP, no empty
    row subset, full feature set absent) the parity witness is additionally
    validated as a constructive certificate.
    """
    M = design.toarray()
    if exact.rank(M) != M.shape[0]:
        raise ValueError("design matrix is rank-deficient")
    result = exact.in_rowspace(M, [1] * M.shape[1])
    rows = set(design.rows)
    k = len(design.cols[0])
    if design.space == "IP" and frozenset() not in rows and frozenset(range(k)) not in rows:
        d = parity_witness(k)
        if np.any(M @ d != 0) or int(d.sum()) == 0:
            raise RuntimeError("parity witness failed to certify the missing overall effect")
        if result:
            raise RuntimeError("overall effect found despite a valid parity witness")
    return result


@dataclass(frozen=True)
class BinomialGenerator:
    """Binomial p^(d+) - p^(d-) read off one kernel vector.

    ``plus`` and ``minus`` are disjoint multisets of cells given as
    (cell, exponent) pairs in canonical cell order.
    """

    plus: tuple[tuple[Cell, int], ...]
    minus: tuple[tuple[Cell, int], ...]
    homogeneous: bool
    uses_zero_cell: bool
    space: str

    def degree_gap(self) -> int:
        return sum(e for _, e in self.minus) - sum(e for _, e in self.plus)


def _generator_from_vector(d, cells, space: str) -> BinomialGenerator:
    plus = tuple((c, int(v)) for c, v in zip(cells, d) if v > 0)
    minus = tuple((c, -int(v)) for c, v in zip(cells, d) if v < 0)
    support = [c for c, _ in plus + minus]
    return BinomialGenerator(
        plus=plus,
        minus=minus,
        homogeneous=sum(e for _, e in plus) == sum(e for _, e in minus),
        uses_zero_cell=any(not any(c) for c in support),
        space=space,
    )


def binomial_generators(model: Model) -> list[BinomialGenerator]:
    """One generator per kernel basis vector (empty for saturated models)."""
    return [_generator_from_vector(d, model.design.cols, model.space)
            for d in model.kernel]


def homogenize(generators, direction: str = "to_CP") -> list[BinomialGenerator]:
    """Move generators between IP and CP with the zero-cell variable.

    ``to_CP`` multiplies the lighter side of each non-homogeneous generator
    by the exact power of the zero cell equalizing degrees; homogeneous
    generators pass through unchanged.  ``to_IP`` sets the zero-cell
    variable to one.  The two directions compose to the identity.
    """
    if direction not in ("to_CP", "to_IP"):
        raise ValueError(f"direction must be 'to_CP' or 'to_IP', got {direction!r}")
    out = []
    for g in generators:
        if direction == "to_CP":
            if g.space != "IP":
                raise ValueError("to_CP expects generators on IP")
            out.append(_homogenize_one(g))
        else:
            if g.space != "CP":
                raise ValueError("to_IP expects generators on CP")
            out.append(_dehomogenize_one(g))
    return out


def dehomogenize(generators) -> list[BinomialGenerator]:
    return homogenize(generators, "to_IP")


def _homogenize_one(g: BinomialGenerator) -> BinomialGenerator:
    gap = g.degree_gap()
    plus, minus = g.plus, g.minus
    if gap != 0:
        k = len((plus + minus)[0][0])
        zero = (0,) * k
        pad = ((zero, abs(gap)),)
        if gap > 0:
            plus = pad + plus
        else:
            minus = pad + minus
    return BinomialGenerator(plus=plus, minus=minus, homogeneous=True,
                             uses_zero_cell=gap != 0, space="CP")


def _dehomogenize_one(g: BinomialGenerator) -> BinomialGenerator:
    plus = tuple((c, e) for c, e in g.plus if any(c))
    minus = tuple((c, e) for c, e in g.minus if any(c))
    return BinomialGenerator(
        plus=plus,
        minus=minus,
        homogeneous=sum(e for _, e in plus) == sum(e for _, e in minus),
        uses_zero_cell=False,
        space="IP",
    )


def binomial_string(g: BinomialGenerator) -> str:
    """Render a generator like ``p0*p110 - p010*p100`` (zero cell prints as p0)."""

    def side(terms) -> str:
        if not terms:
            return "1"
        parts = []
        for cell, e in terms:
            name = "p0" if not any(cell) else "p" + cell_label(cell)
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    return f"{side(g.plus)} - {side(g.minus)}"


def full_independence_class(k: int) -> SubsetClass:
    """The ascending class of all subsets of size >= 2 (mutual AS independence)."""
    check_feature_count(k)
    if k < 2:
        raise ValueError("need at least two features")
    seeds = [frozenset(c) for c in itertools.combinations(range(k), 2)]
    return ascending_closure(seeds, k)
