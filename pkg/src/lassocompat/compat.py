"""Compatibility constants, effective sparsity and restricted eigenvalues.

The compatibility constant

    phi2(L, S) = min { |S| b' Sigma b : ||b_S||_1 = 1, ||b_{-S}||_1 <= L }

has a non-convex equality constraint.  Fixing the sign pattern ``s`` of
``b_S`` turns it into a convex quadratic program.  Writing
``b_S = diag(s) u`` and ``b_{-S} = w+ - w-`` it reads, in standard form,

    min x' Q x   s.t.   x >= 0,  sum(u) = 1,  sum(w+) + sum(w-) + slack = L,

which is solved exactly by a primal active-set method and certified by
its Frank-Wolfe duality gap.  All ``2^(|S|-1)`` orthants are enumerated
(``s`` and ``-s`` give the same value).
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import SetTooLarge
from .gram import as_gram

MAX_SET = 16
ZERO_VALUE = 1e-10
GAP_TOL = 1e-11

_CACHE = {}


@dataclass(frozen=True)
class CompatReport:
    """Result of a compatibility computation.

    ``effective_sparsity`` is ``inf`` when ``value`` is reported as 0 and 0
    for the empty set.  ``certified`` is true when every orthant's duality
    gap is below the tolerance.
    """

    set: tuple
    stretch: float
    value: float
    minimizer: np.ndarray
    effective_sparsity: float
    lambda_min: float
    lambda_max: float
    restricted_eigenvalue: float = None
    certified: bool = True
    gap: float = 0.0

    @property
    def is_zero(self):
        return self.value == 0.0


# ---------------------------------------------------------------- orthant QP

def _orthant_problem(G, S, rest, s, L):
    """Build ``Q`` and the block layout for the orthant ``s``."""
    k, m = len(S), len(rest)
    p = G.shape[0]
    T = np.zeros((p, k + 2 * m + 1))
    T[S, np.arange(k)] = s
    T[rest, k + np.arange(m)] = 1.0
    T[rest, k + m + np.arange(m)] = -1.0
    Q = T.T @ G @ T
    return Q, T


def _lmo_gap(g, x, k, L, has_rest):
    lo = g[:k].min()
    val = lo
    if has_rest:
        val += L * min(g[k:].min(), 0.0)
    return float(g @ x - val)


def _kkt_solve(K, rhs):
    """Direct solve, falling back to least squares on (near-)singular systems."""
    try:
        sol = np.linalg.solve(K, rhs)
        if np.all(np.isfinite(sol)) and np.max(np.abs(K @ sol - rhs)) <= 1e-12 * (1 + np.max(np.abs(sol))):
            return sol
    except np.linalg.LinAlgError:
        pass
    return np.linalg.lstsq(K, rhs, rcond=None)[0]


def _active_set_qp(Q, k, n, L, has_rest, x0=None, max_iter=None):
    """Primal active-set method for the standard-form orthant problem.

    Variables ``0..k-1`` form the unit simplex, ``k..n-1`` (including the
    slack, last) sum to ``L``.  Returns ``(x, gap)``.
    """
    A = np.zeros((2, n))
    A[0, :k] = 1.0
    c = np.array([1.0, L])
    if has_rest:
        A[1, k:] = 1.0
        rows = [0, 1]
    else:
        rows = [0]
    A, c = A[rows], c[rows]
    if x0 is None:
        x = np.zeros(n)
        x[0] = 1.0
        if has_rest:
            x[n - 1] = L
    else:
        x = x0.copy()
    inP = x > 0
    max_iter = max_iter or 20 * n + 50
    tol = 1e-13
    r = len(rows)
    Q2 = 2 * Q
    for _ in range(max_iter):
        idx = np.flatnonzero(inP)
        m = idx.size
        K = np.zeros((m + r, m + r))
        K[:m, :m] = Q2[idx][:, idx]
        K[m:, :m] = A[:, idx]
        K[:m, m:] = A[:, idx].T
        rhs = np.zeros(m + r)
        rhs[m:] = c
        sol = _kkt_solve(K, rhs)
        xh = sol[:m]
        if np.all(xh >= -tol):
            x = np.zeros(n)
            x[idx] = np.maximum(xh, 0.0)
            mu = Q2 @ x + A.T @ sol[m:]
            mu[inP] = np.inf
            j = int(np.argmin(mu))  # first index among ties
            if mu[j] >= -1e-12:
                break
            inP[j] = True
        else:
            xp = x[idx]
            neg = xh < -tol
            ratios = xp[neg] / (xp[neg] - xh[neg])
            alpha = float(ratios.min())
            newp = xp + alpha * (xh - xp)
            x = np.zeros(n)
            x[idx] = np.maximum(newp, 0.0)
            x[idx[neg][np.argmin(ratios)]] = 0.0
            inP = x > 0
            if not inP.any():  # pragma: no cover - cannot happen for a feasible start
                break
    # restore exact feasibility of the two sums
    x[:k] /= x[:k].sum()
    if has_rest:
        tot = x[k:].sum()
        if tot > 0:
            x[k:] *= L / tot
    g = 2 * Q @ x
    return x, _lmo_gap(g, x, k, L, has_rest)


def _project_simplex(v, z=1.0):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - z
    ind = np.arange(1, v.size + 1)
    r = ind[u - css / ind > 0][-1]
    return np.maximum(v - css[r - 1] / r, 0.0)


def _fista(Q, k, n, L, has_rest, x0, iters=20000):
    """Accelerated projected gradient with restart; fallback solver."""
    step = 1.0 / (2 * max(np.linalg.eigvalsh(Q)[-1], 1e-12))
    x = x0.copy()
    y, t = x.copy(), 1.0
    f_old = x @ Q @ x
    for _ in range(iters):
        g = 2 * Q @ y
        z = y - step * g
        xn = np.empty(n)
        xn[:k] = _project_simplex(z[:k])
        if has_rest:
            xn[k:] = _project_simplex(z[k:], L)
        else:
            xn[k:] = 0.0
        f_new = xn @ Q @ xn
        if f_new > f_old:
            y, t = x.copy(), 1.0
            continue
        tn = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = xn + (t - 1) / tn * (xn - x)
        x, t, f_old = xn, tn, f_new
        if _lmo_gap(2 * Q @ x, x, k, L, has_rest) <= GAP_TOL:
            break
    return x, _lmo_gap(2 * Q @ x, x, k, L, has_rest)


def _solve_orthant(G, S, rest, s, L, rng, restarts):
    Q, T = _orthant_problem(G, S, rest, s, L)
    k, n = len(S), Q.shape[0]
    has_rest = len(rest) > 0
    x, gap = _active_set_qp(Q, k, n, L, has_rest)
    tries = 0
    while gap > GAP_TOL and tries < restarts:
        # randomised restarts, then accelerated gradient from the best point
        x0 = np.zeros(n)
        x0[:k] = rng.dirichlet(np.ones(k))
        if has_rest:
            x0[k:] = rng.dirichlet(np.ones(n - k)) * L
        xr, gr = _active_set_qp(Q, k, n, L, has_rest, x0=x0)
        if xr @ Q @ xr < x @ Q @ x:
            x, gap = xr, gr
        tries += 1
    if gap > GAP_TOL:
        xf, gf = _fista(Q, k, n, L, has_rest, x)
        xp, gp = _active_set_qp(Q, k, n, L, has_rest, x0=xf)
        for cand, cg in ((xf, gf), (xp, gp)):
            if cg < gap:
                x, gap = cand, cg
    beta = T @ x
    return float(x @ Q @ x), gap, beta


# ---------------------------------------------------------------- public API

def _normalize_set(S, p):
    S = tuple(sorted({int(j) for j in S}))
    if any(j < 0 or j >= p for j in S):
        raise IndexError(f"set {S} out of range for p={p}")
    return S


def extreme_eigenvalues(gram):
    """Smallest and largest eigenvalue of the Gram matrix."""
    g = as_gram(gram)
    return g.lambda_min, g.lambda_max


def compatibility(gram, S, L=1.0, seed=0, restarts=3, with_re=False):
    """Compatibility constant ``phi2(L, S)`` by sign-orthant enumeration.

    Parameters
    ----------
    gram : GramMatrix or array_like
    S : iterable of int
        0-based index set.
    L : float
        Stretching factor, at least 1.
    restarts : int
        Random restarts per orthant, used only when the active-set solve
        does not certify.
    with_re : bool
        Also compute the restricted eigenvalue.

    Raises
    ------
    SetTooLarge
        If ``|S| > 16``.
    """
    g = as_gram(gram)
    G = g.entries
    p = g.p
    S = _normalize_set(S, p)
    if L < 1:
        raise ValueError("stretching factor L must be at least 1")
    if len(S) > MAX_SET:
        raise SetTooLarge(f"|S| = {len(S)} exceeds the enumeration limit {MAX_SET}")
    lmin, lmax = g.lambda_min, g.lambda_max
    if not S:
        return CompatReport((), float(L), 0.0, np.zeros(p), 0.0, lmin, lmax)
    key = (G.tobytes(), S, float(L))
    if key in _CACHE:
        rep = _CACHE[key]
    else:
        rest = [j for j in range(p) if j not in S]
        rng = np.random.default_rng(seed)
        k = len(S)
        best = (np.inf, None, 0.0)
        worst_gap = 0.0
        for tail in product((1.0, -1.0), repeat=k - 1):
            s = np.array((1.0,) + tail)
            val, gap, beta = _solve_orthant(G, list(S), rest, s, L, rng, restarts)
            worst_gap = max(worst_gap, gap)
            if val < best[0] - 1e-15:
                best = (val, beta, gap)
        val = k * best[0]
        val = 0.0 if val < ZERO_VALUE else val
        gamma = k / val if val > 0 else np.inf
        rep = CompatReport(S, float(L), val, best[1], gamma, lmin, lmax,
                           certified=worst_gap <= GAP_TOL, gap=worst_gap)
        _CACHE[key] = rep
    if with_re:
        rep = CompatReport(rep.set, rep.stretch, rep.value, rep.minimizer, rep.effective_sparsity,
                           rep.lambda_min, rep.lambda_max, restricted_eigenvalue(g, S),
                           rep.certified, rep.gap)
    return rep


def effective_sparsity(gram, S, L=1.0):
    return compatibility(gram, S, L).effective_sparsity


def clear_cache():
    _CACHE.clear()


def _project_l1(v, radius):
    if radius <= 0:
        return np.zeros_like(v)
    if np.abs(v).sum() <= radius:
        return v
    return np.sign(v) * _project_simplex(np.abs(v), radius)


def restricted_eigenvalue(gram, S, restarts=50, seed=0, iters=400):
    """Best-effort restricted eigenvalue ``kappa2(S)``.

    Minimises ``b' Sigma b / ||b_S||_2^2`` over ``||b_{-S}||_1 <= ||b_S||_1``
    by projected gradient from ``restarts`` seeded starts.  The result is
    the value at a feasible point, hence an upper bound on the true
    minimum; for the full set it is the exact smallest eigenvalue.
    """
    g = as_gram(gram)
    G = g.entries
    p = g.p
    S = _normalize_set(S, p)
    if len(S) > 12:
        raise SetTooLarge(f"|S| = {len(S)} exceeds the restricted-eigenvalue limit 12")
    if not S:
        raise ValueError("restricted eigenvalue needs a non-empty set")
    if len(S) == p:
        return g.lambda_min
    S = np.array(S)
    rest = np.setdiff1d(np.arange(p), S)
    rng = np.random.default_rng(seed)
    step = 0.5 / max(g.lambda_max, 1e-12)

    def fix(b):
        bs = b[S]
        nrm = np.linalg.norm(bs)
        if nrm == 0:
            bs = rng.standard_normal(S.size)
            nrm = np.linalg.norm(bs)
        b = b.copy()
        b[S] = bs / nrm
        b[rest] = _project_l1(b[rest], np.abs(b[S]).sum())
        return b

    starts = []
    w, V = np.linalg.eigh(G)
    for j in range(p):
        starts.append(V[:, j])
    while len(starts) < restarts:
        starts.append(rng.standard_normal(p))
    best = np.inf
    for b in starts:
        b = fix(b)
        f = b @ G @ b
        for _ in range(iters):
            bn = fix(b - step * 2 * (G @ b))
            fn = bn @ G @ bn
            if fn > f - 1e-15:
                break
            b, f = bn, fn
        best = min(best, f)
    return float(max(best, 0.0))
