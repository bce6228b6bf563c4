"""Dual lattice search over hierarchical model classes.

The lattice consists of the models generated by ascending classes whose
members all have at least two features (so every main effect stays in the
design; classes with singleton members pin single cell probabilities to one
and are never fittable).  Models are ordered by ascending-class inclusion:
a larger ascending class means more vanishing interactions, hence a more
parsimonious model contained in every model with a smaller class.

Each wave tests the minimal undetermined models (the most parsimonious
ones still in play; testing bottom-up means a model's fate is settled by
its own fit rather than by a borderline rejection cascading down from an
ancestor), then propagates: an accepted model accepts everything
containing it, a rejected model rejects everything contained in it.  A
wave's batch is an antichain, so test decisions cannot conflict; they are
merged in sorted key order, and the final accepted/rejected sets are
coherent by construction and independent of fit scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fit import FitError, FitResult, ObservedCounts, mle
from .lattice import FeatureSet, SubsetClass, ascending_classes, check_feature_count
from .models import ModelSpec, build_model

SEARCH_KINDS = ("has", "qll")


def hierarchical_classes(k: int) -> list[SubsetClass]:
    """The model lattice for searching: ascending classes with members of size >= 2.

    Classes with singleton members pin individual cell probabilities to one
    and have an empty feasible set, so they are excluded here; the remaining
    classes keep every main effect in the design, mirroring the usual
    hierarchical convention.
    """
    check_feature_count(k)
    if not 2 <= k <= 8:
        raise ValueError(f"hierarchical lattice enumeration supports 2 <= k <= 8, got {k}")
    return ascending_classes(k, min_member_size=2)


@dataclass
class SearchState:
    """Outcome of a dual lattice search."""

    k: int
    kind: str
    alpha: float
    accepted: set[str] = field(default_factory=set)
    rejected: set[str] = field(default_factory=set)
    undetermined: set[str] = field(default_factory=set)
    errors: dict[str, str] = field(default_factory=dict)
    results: dict[str, FitResult] = field(default_factory=dict)
    decisions: dict[str, dict] = field(default_factory=dict)
    waves: list[list[str]] = field(default_factory=list)
    specs: dict[str, ModelSpec] = field(default_factory=dict)

    def minimal_accepted(self) -> list[str]:
        """Accepted models with no accepted proper sub-model (most parsimonious)."""
        return sorted(
            m for m in self.accepted
            if not any(n != m and self._asc(m) < self._asc(n) for n in self.accepted)
        )

    def maximal_rejected(self) -> list[str]:
        return sorted(
            m for m in self.rejected
            if not any(n != m and self._asc(n) < self._asc(m) for n in self.rejected)
        )

    def _asc(self, key: str) -> frozenset[FeatureSet]:
        return self.specs[key].asc.members

    def to_dict(self) -> dict:
        decisions = {
            key: dict(info) for key, info in sorted(self.decisions.items())
        }
        return {
            "k": self.k,
            "kind": self.kind,
            "alpha": self.alpha,
            "waves": self.waves,
            "decisions": decisions,
            "minimal_accepted": self.minimal_accepted(),
            "maximal_rejected": self.maximal_rejected(),
            "errors": dict(sorted(self.errors.items())),
            "models": {key: r.to_dict() for key, r in sorted(self.results.items())},
        }


def _passes(result: FitResult, alpha: float, statistic: str) -> bool:
    p_x2, p_g2 = result.p_values
    if statistic == "X2":
        return p_x2 >= alpha
    if statistic == "G2":
        return p_g2 >= alpha
    return min(p_x2, p_g2) >= alpha


def eh_search(counts: ObservedCounts, k: int, kind: str, alpha: float,
              statistic: str = "both", tol_inner: float = 1e-10,
              tol_outer: float = 1e-10, zero_policy: str = "error") -> SearchState:
    """Dual search for the accepted/rejected frontiers at level alpha.

    A tested model is accepted when its goodness-of-fit p-value(s) reach
    alpha (both statistics by default; ``statistic`` may pick either one).
    Fit failures leave a model undecided-by-error, excluded from coherence
    propagation and from the frontiers.
    """
    if kind not in SEARCH_KINDS:
        raise ValueError(f"search kind must be one of {SEARCH_KINDS}, got {kind!r}")
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha!r}")
    if counts.space != "IP" or counts.k != k:
        raise ValueError("counts must live on the IP with the same feature count")
    if statistic not in ("both", "X2", "G2"):
        raise ValueError(f"statistic must be 'both', 'X2' or 'G2', got {statistic!r}")

    state = SearchState(k=k, kind=kind, alpha=alpha)
    asc_by_key: dict[str, frozenset[FeatureSet]] = {}
    for asc in hierarchical_classes(k):
        spec = ModelSpec(k=k, kind=kind, asc=asc)
        key = spec.generating_string()
        state.specs[key] = spec
        asc_by_key[key] = asc.members
    state.undetermined = set(state.specs)

    wave = 0
    while state.undetermined:
        wave += 1
        und = state.undetermined
        batch = sorted(
            m for m in und
            if not any(n != m and asc_by_key[m] < asc_by_key[n] for n in und)
        )
        state.waves.append(batch)

        tested: dict[str, bool] = {}
        for key in batch:
            try:
                result = mle(counts, build_model(state.specs[key]),
                             tol_inner=tol_inner, tol_outer=tol_outer,
                             zero_policy=zero_policy)
            except FitError as err:
                state.errors[key] = str(err)
                state.decisions[key] = {"status": "error", "source": "error", "wave": wave}
                state.undetermined.discard(key)
                continue
            state.results[key] = result
            tested[key] = _passes(result, alpha, statistic)

        for key in sorted(tested):
            if key not in state.undetermined:
                continue  # already settled by propagation (impossible for antichain batches)
            if tested[key]:
                covered = [m for m in state.undetermined
                           if asc_by_key[m] <= asc_by_key[key]]
                for m in covered:
                    state.accepted.add(m)
                    state.undetermined.discard(m)
                    source = "tested" if m == key else "propagated"
                    state.decisions[m] = {"status": "accepted", "source": source, "wave": wave}
            else:
                covered = [m for m in state.undetermined
                           if asc_by_key[m] >= asc_by_key[key]]
                for m in covered:
                    state.rejected.add(m)
                    state.undetermined.discard(m)
                    source = "tested" if m == key else "propagated"
                    state.decisions[m] = {"status": "rejected", "source": source, "wave": wave}

    return state


def simulate_counts(spec: ModelSpec, n: int, rng, base=None):
    """Multinomial counts from a seeded in-model distribution (for searches/tests).

    The generating distribution is the G-IPF fit of a positive base
    distribution (random when omitted), so it satisfies the model exactly.
    """
    from .fit import gipf

    model = build_model(spec)
    cells = 2**spec.k - 1
    if base is None:
        base = rng.uniform(0.5, 1.5, size=cells)
        base /= base.sum()
    p, _, _ = gipf(base, model)
    counts = rng.multinomial(n, p / p.sum())
    return ObservedCounts(counts=counts, k=spec.k, space="IP"), p
