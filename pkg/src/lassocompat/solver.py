"""Coordinate-descent Lasso solvers with KKT certificates.

Both the noiseless criterion ``||X(beta - beta0)||^2 + 2 lam ||beta||_1``
and the noisy one ``||y - X beta||^2 + 2 lam ||beta||_1`` are instances of

    f(beta) = beta^T G beta - 2 c^T beta + 2 lam sum_j w_j |beta_j| + const,

so a single weighted core handles everything.  Convergence is declared on
the sup-norm KKT residual rather than on objective change.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDiagonal, NonConvergence
from .gram import GramMatrix, as_gram

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class ProblemInstance:
    """Gram matrix, true coefficients and tuning parameter.

    ``active_set`` is recomputed from ``beta0`` on every access.
    """

    gram: GramMatrix
    beta0: np.ndarray
    lam: float

    def __post_init__(self):
        g = as_gram(self.gram)
        b = np.array(self.beta0, dtype=float).ravel()
        if b.shape[0] != g.p:
            raise ValueError(f"beta0 has {b.shape[0]} entries, gram has p={g.p}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam!r}")
        b.setflags(write=False)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "beta0", b)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def active_set(self):
        return tuple(int(j) for j in np.flatnonzero(self.beta0 != 0))

    @property
    def p(self):
        return self.gram.p


@dataclass(frozen=True)
class LassoSolution:
    beta_star: np.ndarray
    subgradient: np.ndarray
    kkt_residual: float
    iterations: int
    prediction_error: float
    penalized_value: float
    objective: float
    history: tuple = field(default=(), repr=False, compare=False)


def soft_threshold(u, t):
    """Soft thresholding with ties at ``|u| = t`` sent to 0."""
    if u > t:
        return u - t
    if u < -t:
        return u + t
    return 0.0


def _subgradient(beta, grad, lam, w):
    z = np.sign(beta).astype(float)
    off = np.abs(beta) <= ZERO_TOL
    if lam > 0:
        scale = lam * w
        with np.errstate(divide="ignore", invalid="ignore"):
            zz = np.where(scale > 0, -grad / scale, 0.0)
        z[off] = np.clip(zz[off], -1.0, 1.0)
    else:
        z[off] = 0.0
    return z


def _kkt(beta, grad, lam, w):
    """Sup-norm of ``grad + lam w z`` minimised over admissible ``z``."""
    lw = lam * w
    nz = beta != 0
    r = np.where(nz, np.abs(grad + lw * np.sign(beta)), np.maximum(np.abs(grad) - lw, 0.0))
    return float(r.max()) if r.size else 0.0


def _smooth(beta, G, c):
    return float(beta @ G @ beta - 2.0 * c @ beta)


def _objective(beta, G, c, lam, w, const):
    return _smooth(beta, G, c) + 2.0 * lam * float(w @ np.abs(beta)) + const


def _polish(beta, G, c, lam, w):
    """Solve the stationarity equation on the current support."""
    A = np.flatnonzero(beta != 0)
    if A.size == 0:
        return None
    s = np.sign(beta[A])
    rhs = c[A] - lam * w[A] * s
    sol = np.linalg.lstsq(G[np.ix_(A, A)], rhs, rcond=None)[0]
    cand = np.zeros_like(beta)
    cand[A] = sol
    # drop coordinates whose sign flipped
    if np.any(sol * s < 0):
        return None
    return cand


def lasso_core(G, c, lam, weights=None, const=0.0, start=None, tol=DEFAULT_TOL,
               max_iter=DEFAULT_MAX_ITER, record=True):
    """Minimise ``b'Gb - 2c'b + 2 lam sum w|b| + const`` by cyclic coordinate descent.

    Returns
    -------
    beta, grad, iterations, history
    """
    G = np.asarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    p = G.shape[0]
    w = np.ones(p) if weights is None else np.asarray(weights, dtype=float)
    diag = np.diag(G).copy()
    if np.any(diag <= 0):
        j = int(np.flatnonzero(diag <= 0)[0])
        raise DegenerateDiagonal(f"Gram diagonal entry {j} is zero")
    beta = np.zeros(p) if start is None else np.array(start, dtype=float)
    lw = lam * w
    grad = G @ beta - c
    history = [_objective(beta, G, c, lam, w, const)] if record else []
    res = _kkt(beta, grad, lam, w)
    it = 0
    prev_support = None
    while res > tol:
        if it >= max_iter:
            raise NonConvergence(
                f"coordinate descent did not reach tol={tol:g} in {max_iter} sweeps "
                f"(residual {res:.3e})", iterations=it, residual=res)
        it += 1
        for j in range(p):
            bj = beta[j]
            u = diag[j] * bj - grad[j]
            new = soft_threshold(u, lw[j]) / diag[j]
            if new != bj:
                grad += G[:, j] * (new - bj)
                beta[j] = new
        grad = G @ beta - c
        res = _kkt(beta, grad, lam, w)
        support = tuple(np.flatnonzero(beta != 0))
        if res > tol and support == prev_support:
            cand = _polish(beta, G, c, lam, w)
            if cand is not None:
                cgrad = G @ cand - c
                cres = _kkt(cand, cgrad, lam, w)
                f_old = _objective(beta, G, c, lam, w, const)
                f_new = _objective(cand, G, c, lam, w, const)
                if cres < res and f_new <= f_old + 1e-15 * max(1.0, abs(f_old)):
                    beta, grad, res = cand, cgrad, cres
        prev_support = support
        if record:
            history.append(_objective(beta, G, c, lam, w, const))
    return beta, grad, it, tuple(history)


def _make_solution(beta, grad, lam, w, it, history, G, beta0, const_obj):
    z = _subgradient(beta, grad, lam, w)
    res = _kkt(beta, grad, lam, w)
    if beta0 is None:
        pred = pen = np.nan
    else:
        d = beta - beta0
        pred = max(float(d @ G @ d), 0.0)
        off = beta0 == 0
        pen = pred + 2.0 * lam * float(np.abs(beta[off]).sum())
    obj = const_obj(beta)
    beta = beta.copy()
    beta.setflags(write=False)
    z.setflags(write=False)
    return LassoSolution(beta, z, res, it, pred, pen, obj, history)


def solve_noiseless(instance, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, start=None, weights=None):
    """Minimise ``(b - beta0)' Sigma (b - beta0) + 2 lam ||b||_1``.

    Parameters
    ----------
    instance : ProblemInstance
    tol : float
        KKT sup-norm tolerance.
    max_iter : int
        Maximum number of full sweeps.
    start : array_like, optional
        Warm start (defaults to zero).
    weights : array_like, optional
        Per-coordinate penalty weights; the plain Lasso uses all ones.

    Raises
    ------
    NonConvergence, DegenerateDiagonal
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = instance.gram.entries
    b0 = instance.beta0
    lam = instance.lam
    c = G @ b0
    const = float(b0 @ c)
    w = np.ones(instance.p) if weights is None else np.asarray(weights, dtype=float)
    beta, grad, it, hist = lasso_core(G, c, lam, w, const, start, tol, max_iter)
    return _make_solution(beta, grad, lam, w, it, hist, G, b0,
                          lambda b: noiseless_objective(G, b0, lam, b, w))


def solve_noisy(design, y, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, beta0=None, start=None):
    """Minimise ``||y - X b||^2 + 2 lam ||b||_1``.

    ``design`` is a :class:`~lassocompat.gram.DesignFactor` or an ``n x p``
    array.  When ``beta0`` is given the prediction-error fields of the
    returned solution are filled in (with respect to ``X'X``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    X = np.asarray(getattr(design, "columns", design), dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"y has {y.shape[0]} entries, design has n={X.shape[0]}")
    G = X.T @ X
    c = X.T @ y
    const = float(y @ y)
    w = np.ones(X.shape[1])
    beta, grad, it, hist = lasso_core(G, c, lam, w, const, start, tol, max_iter)
    b0 = None if beta0 is None else np.asarray(beta0, dtype=float)

    def obj(b):
        r = y - X @ b
        return float(r @ r) + 2.0 * lam * float(np.abs(b).sum())

    return _make_solution(beta, grad, lam, w, it, hist, G, b0, obj)


def noiseless_objective(gram, beta0, lam, beta, weights=None):
    G = np.asarray(gram, dtype=float)
    d = np.asarray(beta, dtype=float) - np.asarray(beta0, dtype=float)
    w = 1.0 if weights is None else np.asarray(weights, dtype=float)
    return float(d @ G @ d) + 2.0 * lam * float(np.sum(w * np.abs(beta)))


def kkt_residual(gram, beta0, lam, beta):
    """Smallest ``||Sigma(beta - beta0) + lam z||_inf`` over ``z`` in the subdifferential."""
    G = np.asarray(gram, dtype=float)
    beta = np.asarray(beta, dtype=float)
    grad = G @ (beta - np.asarray(beta0, dtype=float))
    return _kkt(beta, grad, float(lam), np.ones_like(beta))


# ---------------------------------------------------------------- uniqueness

@dataclass(frozen=True)
class UniquenessVerdict:
    unique: bool
    witnesses: tuple
    objectives: tuple
    max_spread: float

    @property
    def objective_gap(self):
        return abs(self.objectives[0] - self.objectives[1]) if len(self.objectives) >= 2 else 0.0


def _null_witness(G, beta, z, lam, tol=1e-9):
    """Move along a direction that keeps X beta and the penalty fixed."""
    if lam > 0:
        E = np.flatnonzero(np.abs(np.abs(z) - 1.0) <= 1e-7)
    else:
        E = np.arange(beta.size)
    if E.size == 0:
        return None
    GE = G[np.ix_(E, E)]
    w, V = np.linalg.eigh(GE)
    N = V[:, w <= tol * max(1.0, w[-1])]
    if N.shape[1] == 0:
        return None
    if lam > 0:
        zE = z[E]
        # penalty stays linear only along directions orthogonal to z_E
        N = N - np.outer(zE, zE @ N) / (zE @ zE)
        u, s, _ = np.linalg.svd(N, full_matrices=False)
        N = u[:, s > 1e-10]
    for k in range(N.shape[1]):
        for sign in (1.0, -1.0):
            v = np.zeros_like(beta)
            v[E] = sign * N[:, k]
            t = _max_step(beta, v, z if lam > 0 else None)
            if t > 1e-6:
                return beta + t * v
    return None


def _max_step(beta, v, z):
    t = np.inf
    for j in np.flatnonzero(np.abs(v) > 1e-14):
        if abs(beta[j]) > ZERO_TOL:
            if beta[j] * v[j] < 0:
                t = min(t, -beta[j] / v[j])
        elif z is not None and z[j] * v[j] < 0:
            return 0.0
    if not np.isfinite(t):
        t = 1.0
    return t


def uniqueness_probe(instance, tol=DEFAULT_TOL, n_random=3, seed=0):
    """Solve from several starts and look for a second minimiser.

    Starts are zero, ``beta0``, the signed unit vectors ``+-e_j`` and
    ``n_random`` seeded Gaussian vectors (at least 8 in total).  A flat
    direction through the first solution is also searched for.
    """
    p = instance.p
    rng = np.random.default_rng(seed)
    starts = [np.zeros(p), np.array(instance.beta0)]
    for j in range(p):
        for s in (1.0, -1.0):
            e = np.zeros(p)
            e[j] = s
            starts.append(e)
    n_extra = max(n_random, 8 - len(starts))
    starts += [rng.standard_normal(p) for _ in range(n_extra)]
    sols = [solve_noiseless(instance, tol=tol, start=s) for s in starts]
    betas = [s.beta_star for s in sols]
    objs = [s.objective for s in sols]
    extra = _null_witness(instance.gram.entries, np.array(betas[0]),
                          np.array(sols[0].subgradient), instance.lam)
    if extra is not None:
        betas.append(extra)
        objs.append(noiseless_objective(instance.gram, instance.beta0, instance.lam, extra))
    ref = betas[0]
    spreads = [float(np.max(np.abs(b - ref))) for b in betas]
    k = int(np.argmax(spreads))
    spread = spreads[k]
    if spread <= 1e-7:
        return UniquenessVerdict(True, (ref,), (objs[0],), spread)
    return UniquenessVerdict(False, (ref, betas[k]), (objs[0], objs[k]), spread)
