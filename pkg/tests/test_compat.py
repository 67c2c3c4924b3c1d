from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from _util import random_fair_gram
from lassocompat.compat import clear_cache, compatibility, effective_sparsity, restricted_eigenvalue
from lassocompat.errors import SetTooLarge


def reference_compat(G, S, L=1.0, starts=6, seed=0):
    """SLSQP over each sign orthant of ``b_S`` from several starting points."""
    G = np.asarray(G)
    p = G.shape[0]
    rest = [j for j in range(p) if j not in S]
    rng = np.random.default_rng(seed)
    k = len(S)
    best = np.inf
    for tail in product((1.0, -1.0), repeat=k - 1):
        s = np.array((1.0,) + tail)

        def beta(x):
            b = np.zeros(p)
            b[S] = s * x[:k]
            b[rest] = x[k:k + len(rest)] - x[k + len(rest):]
            return b

        cons = [{"type": "eq", "fun": lambda x: x[:k].sum() - 1}]
        if rest:
            cons.append({"type": "ineq", "fun": lambda x: L - x[k:].sum()})
        n = k + 2 * len(rest)
        for _ in range(starts):
            x0 = np.concatenate([rng.dirichlet(np.ones(k)), rng.uniform(0, L / max(1, 2 * len(rest)),
                                                                         2 * len(rest))])
            res = minimize(lambda x: beta(x) @ G @ beta(x), x0, method="SLSQP", constraints=cons,
                           bounds=[(0, None)] * n, options={"ftol": 1e-14, "maxiter": 500})
            best = min(best, float(beta(res.x) @ G @ beta(res.x)))
    return k * best


@pytest.mark.parametrize("p, S", [(1, [0]), (3, [0]), (3, [0, 2]), (5, [1, 2, 3])])
def test_identity_is_one(p, S):
    rep = compatibility(np.eye(p), S)
    assert rep.value == pytest.approx(1.0, abs=1e-12)
    assert rep.certified
    assert rep.effective_sparsity == pytest.approx(len(S))


def test_empty_set_and_validation():
    rep = compatibility(np.eye(3), [])
    assert rep.value == 0.0 and rep.effective_sparsity == 0.0
    with pytest.raises(ValueError):
        compatibility(np.eye(3), [0], L=0.5)
    with pytest.raises(IndexError):
        compatibility(np.eye(3), [3])
    with pytest.raises(SetTooLarge):
        compatibility(np.eye(17), range(17))


def test_zero_for_aligned_direction():
    # columns 1 and 2 are (1, 0) and (1/2, sqrt(3)/2); column 3 cancels their sum exactly
    x3 = -np.array([1.5, np.sqrt(3) / 2])
    X = np.column_stack([[1, 0], [0.5, np.sqrt(3) / 2], x3 / np.linalg.norm(x3)])
    rep = compatibility(X.T @ X, [0, 1], L=np.linalg.norm(x3))
    assert rep.value == 0.0
    assert rep.effective_sparsity == np.inf


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000), p=st.integers(2, 4), n=st.integers(2, 4))
def test_matches_reference(seed, p, n):
    rng = np.random.default_rng(seed)
    G = random_fair_gram(rng, p, min(n, p))
    S = sorted(rng.choice(p, size=int(rng.integers(1, p + 1)), replace=False).tolist())
    rep = compatibility(G, S)
    assert rep.certified
    ref = reference_compat(G, S)
    assert rep.value <= ref + 1e-8
    assert rep.value == pytest.approx(ref, abs=1e-6)
    # the reported minimiser is feasible and attains the value
    b = rep.minimizer
    assert np.abs(b[S]).sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(np.delete(b, S)).sum() <= 1.0 + 1e-12
    assert len(S) * b @ G @ b == pytest.approx(rep.value, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000), p=st.integers(2, 5))
def test_sandwich_and_stretch_monotonicity(seed, p):
    rng = np.random.default_rng(seed)
    G = random_fair_gram(rng, p)
    S = [0, 1] if p > 2 else [0]
    lmin = np.linalg.eigvalsh(G)[0]
    v1 = compatibility(G, S, 1.0).value
    v2 = compatibility(G, S, 2.0).value
    assert lmin - 1e-10 <= v2 <= v1 + 1e-12
    assert v1 <= len(S) * min(G[j, j] for j in S) + 1e-12
    assert effective_sparsity(G, S) == pytest.approx(len(S) / v1)


def test_cache_returns_same_report():
    clear_cache()
    G = random_fair_gram(np.random.default_rng(0), 4)
    assert compatibility(G, [0, 1]) is compatibility(G, [1, 0])


def test_restricted_eigenvalue():
    G = random_fair_gram(np.random.default_rng(1), 4)
    lmin = np.linalg.eigvalsh(G)[0]
    assert restricted_eigenvalue(G, range(4)) == pytest.approx(lmin, abs=1e-12)
    # heuristic upper bound on the minimum, never below the full-space minimum
    assert restricted_eigenvalue(G, [0, 1]) >= lmin - 1e-12
    assert compatibility(G, [0, 1], with_re=True).restricted_eigenvalue is not None
    with pytest.raises(SetTooLarge):
        restricted_eigenvalue(np.eye(13), range(13))
