"""Shared helpers: random distributions, in-model distributions, class sampling."""

from __future__ import annotations

import numpy as np
import pytest

from hasfit import ModelSpec, build_model, hierarchical_classes
from hasfit.lattice import phi, revlex_cells


def random_distribution(rng: np.random.Generator, n_cells: int) -> np.ndarray:
    p = rng.uniform(0.2, 1.0, size=n_cells)
    return p / p.sum()


def random_hierarchical_spec(rng: np.random.Generator, k: int, kind: str) -> ModelSpec:
    classes = hierarchical_classes(k)
    asc = classes[rng.integers(len(classes))]
    return ModelSpec(k=k, kind=kind, asc=asc)


def in_model_distribution(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """A distribution satisfying the model exactly, built without the fitter.

    Draws log-linear coefficients on the design rows; models with the
    overall effect normalize directly, models without it are normalized by
    a common shift of every singleton coefficient (strictly monotone in the
    total, located by bisection).
    """
    model = build_model(spec)
    A = model.design.toarray(np.float64)
    beta = rng.uniform(-0.8, 0.2, size=A.shape[0])
    x = np.exp(A.T @ beta)
    if model.overall_effect:
        return x / x.sum()

    cells = revlex_cells(spec.k, "IP")
    grades = np.array([len(phi(c)) for c in cells], dtype=np.float64)

    def total(shift: float) -> float:
        return float(np.exp(grades * shift) @ x)

    lo, hi = -1.0, 1.0
    while total(lo) >= 1.0:
        lo *= 2.0
    while total(hi) <= 1.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return np.exp(grades * 0.5 * (lo + hi)) * x


def brute_force_mle(model, counts, n_starts: int = 8, seed: int = 0) -> np.ndarray:
    """Independent constrained maximizer of the multinomial log-likelihood.

    Parameterizes log p = design' beta and maximizes the (linear) likelihood
    subject to the normalization constraint with SLSQP from several starts:
    a projected-observed start plus seeded random ones.  Never touches the
    iterative-scaling code path.
    """
    from scipy.optimize import minimize

    A = model.design.toarray(np.float64)
    n = np.asarray(counts, dtype=np.float64)
    q = n / n.sum()

    def neg_ll(beta):
        return -float(n @ (A.T @ beta))

    def neg_ll_grad(_beta):
        return -(A @ n)

    constraint = {
        "type": "eq",
        "fun": lambda b: float(np.exp(A.T @ b).sum() - 1.0),
        "jac": lambda b: A @ np.exp(A.T @ b),
    }
    rng_local = np.random.default_rng(seed)
    start0, *_ = np.linalg.lstsq(A.T, np.log(q), rcond=None)
    starts = [start0] + [start0 + rng_local.normal(0, 0.6, size=A.shape[0])
                         for _ in range(n_starts - 1)]
    best, best_val = None, np.inf
    for s in starts:
        res = minimize(neg_ll, s, jac=neg_ll_grad, constraints=[constraint],
                       method="SLSQP", options={"maxiter": 400, "ftol": 1e-14})
        if res.success and abs(constraint["fun"](res.x)) < 1e-9 and res.fun < best_val:
            best, best_val = res.x, res.fun
    assert best is not None, "oracle optimizer failed from every start"
    return np.exp(A.T @ best)


def chisq_sf_quadrature(x: float, df: int) -> float:
    """Upper chi-square tail by direct numerical integration of the density."""
    import mpmath

    mpmath.mp.dps = 30
    a = mpmath.mpf(df) / 2

    def density(t):
        return t ** (a - 1) * mpmath.exp(-t / 2) / (mpmath.mpf(2) ** a * mpmath.gamma(a))

    return float(mpmath.quad(density, [x, mpmath.inf]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240613)
