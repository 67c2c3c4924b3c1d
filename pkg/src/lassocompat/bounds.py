"""Upper bounds on the noiseless prediction error and their tightness.

``U_I`` uses only the active set, ``U_II`` and ``U_III`` minimise over all
index sets ``S``.  The inner minimisation over ``beta`` in ``U_III`` is
replaced by the best of three explicit candidates (the projection of
``beta0`` onto the columns in ``S``, ``beta0`` itself and a Lasso that
penalizes only the coordinates outside ``S``).  Each candidate value is an
upper bound on the exact inner minimum, so ``u3`` stays a valid bound; it
is labelled "relaxed".
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .compat import compatibility
from .errors import NonConvergence
from .solver import ProblemInstance, lasso_core, solve_noiseless

MAX_EXHAUSTIVE = 16


@dataclass(frozen=True)
class BoundReport:
    u1: float
    u2: float
    u3: float
    u2_argmin_set: tuple
    u3_argmin_set: tuple
    exact_prediction_error: float
    exact_penalized_error: float
    basic_bound_l1: float
    basic_bound_compat: float
    phi2_S0: float
    gaps: dict = field(default_factory=dict)
    u3_relaxed: bool = True
    oracle_agrees: bool = None


def _ratio(bound, exact):
    if exact > 0:
        return bound / exact
    return np.inf if bound > 0 else np.nan


def _l1(v):
    return float(np.abs(v).sum())


def _compat_term(gram, S, lam):
    """``lam^2 |S| / phi2(S)``; 0 for the empty set, ``inf`` when phi2 = 0."""
    if not S:
        return 0.0
    return lam ** 2 * compatibility(gram, S, 1.0).effective_sparsity


def candidate_sets(p, S0=()):
    """Index sets searched by ``U_II`` / ``U_III``, smallest first."""
    if p <= MAX_EXHAUSTIVE:
        for k in range(p + 1):
            yield from combinations(range(p), k)
        return
    seen = set()
    cands = [()] + [(j,) for j in range(p)]
    S0 = tuple(sorted(S0))
    for k in range(1, len(S0) + 1):
        cands += list(combinations(S0, k))
    for S in sorted(cands, key=lambda s: (len(s), s)):
        if S not in seen:
            seen.add(S)
            yield S


def bound_u1(instance, compat=None):
    """``lam^2 s0 / phi2(S0)`` capped by ``lam ||beta0||_1``."""
    lam = instance.lam
    S0 = instance.active_set
    l1 = lam * _l1(instance.beta0)
    if not S0:
        return 0.0
    if compat is None:
        compat = compatibility(instance.gram, S0, 1.0)
    if compat.value <= 0:
        return l1
    return min(lam ** 2 * len(S0) / compat.value, l1)


def u2_term(instance, S):
    lam = instance.lam
    a = _compat_term(instance.gram, S, lam) / 4
    off = np.ones(instance.p, dtype=bool)
    off[list(S)] = False
    r = lam * _l1(instance.beta0[off])
    if not np.isfinite(a):
        return np.inf
    return max((np.sqrt(a) + np.sqrt(a + r)) ** 2, 2 * r)


def bound_u2(instance):
    """Minimum over index sets of the ``U_II`` display.

    Returns
    -------
    value, argmin_set
    """
    best, arg = np.inf, None
    for S in candidate_sets(instance.p, instance.active_set):
        v = u2_term(instance, S)
        if v < best:
            best, arg = v, S
    return float(best), arg


def projection_coefficients(gram, beta0, S):
    """Coefficients ``b_S`` with ``X b_S`` the projection of ``X beta0`` onto ``span(X_S)``."""
    G = np.asarray(gram, dtype=float)
    b = np.zeros(G.shape[0])
    S = list(S)
    if S:
        b[S] = np.linalg.pinv(G[np.ix_(S, S)]) @ (G[S, :] @ beta0)
    return b


def u3_candidates(instance, S, tol=1e-10):
    """Values of the ``U_III`` objective at the explicit candidate ``beta``'s."""
    G = instance.gram.entries
    b0 = instance.beta0
    lam = instance.lam
    c = _compat_term(instance.gram, S, lam)
    if not np.isfinite(c):
        return {}
    off = np.ones(instance.p, dtype=bool)
    off[list(S)] = False

    def value(beta):
        d = beta - b0
        r = _l1(beta[off])
        return max(float(d @ G @ d) + c + 2 * lam * r, 4 * lam * r)

    out = {"projection": value(projection_coefficients(G, b0, S)), "beta0": value(b0.copy())}
    try:
        beta, *_ = lasso_core(G, G @ b0, lam, off.astype(float), start=b0.copy(), tol=tol,
                              max_iter=100_000, record=False)
        out["partial_lasso"] = value(beta)
    except NonConvergence:
        pass
    return out


def bound_u3(instance):
    """Relaxed ``U_III``: minimum over index sets and candidate ``beta``'s.

    Returns
    -------
    value, argmin_set
    """
    best, arg = np.inf, None
    for S in candidate_sets(instance.p, instance.active_set):
        vals = u3_candidates(instance, S)
        if not vals:
            continue
        v = min(vals.values())
        if v < best:
            best, arg = v, S
    return float(best), arg


def basic_inequality_slack(instance, solution, compat=None):
    """Slack in the two displays of the basic inequality (non-negative when they hold).

    Returns ``(l1_slack, compat_slack)``; the second is ``inf`` when
    ``phi2(S0) = 0``.
    """
    lam = instance.lam
    b0 = instance.beta0
    beta = np.asarray(solution.beta_star)
    pred = solution.prediction_error
    s1 = lam * _l1(b0) - (pred + lam * _l1(beta))
    S0 = instance.active_set
    if not S0:
        return s1, -(pred + 2 * lam * _l1(beta))
    if compat is None:
        compat = compatibility(instance.gram, S0, 1.0)
    if compat.value <= 0:
        return s1, np.inf
    off = b0 == 0
    s2 = lam ** 2 * len(S0) / compat.value - (pred + 2 * lam * _l1(beta[off]))
    return s1, s2


def gap_report(instance, spec=None, solution=None, tol=1e-10):
    """Assemble all bounds and the exact errors for one instance.

    When ``spec`` is given, the oracle solution is computed and compared
    with the numeric one (``oracle_agrees``).
    """
    if solution is None:
        solution = solve_noiseless(instance, tol=tol)
    S0 = instance.active_set
    lam = instance.lam
    compat = compatibility(instance.gram, S0, 1.0) if S0 else None
    phi2 = compat.value if compat is not None else np.nan
    u1 = bound_u1(instance, compat)
    u2, s2 = bound_u2(instance)
    u3, s3 = bound_u3(instance)
    l1 = lam * _l1(instance.beta0)
    if not S0:
        bc = 0.0
    elif phi2 > 0:
        bc = lam ** 2 * len(S0) / phi2
    else:
        bc = np.inf
    pred = solution.prediction_error
    pen = solution.penalized_value
    agrees = None
    if spec is not None:
        from .oracle import closed_form
        orc = closed_form(spec, instance.beta0, lam)
        if orc.applicable:
            agrees = bool(abs(orc.penalized_error - pen) <= 1e-8
                          and abs(orc.prediction_error - pred) <= 1e-8)
    gaps = {
        "u1": _ratio(u1, pred),
        "u2": _ratio(u2, pred),
        "u3": _ratio(u3, pred),
        "compat_penalized": _ratio(bc, pen),
        "l1_penalized": _ratio(l1, pen),
    }
    return BoundReport(u1, u2, u3, s2, s3, pred, pen, l1, bc, phi2, gaps, True, agrees)


def sweep_instance(spec, beta0, lam):
    """Convenience: instance built from a design spec."""
    from .designs import build_gram
    return ProblemInstance(build_gram(spec), beta0, lam)
