"""Gram matrices, explicit design factors and fairness checks.

Every quantity in the package is a function of the Gram matrix
``Sigma = X^T X``, so :class:`GramMatrix` is the source of truth and an
explicit design ``X`` is only materialised on demand by :func:`factorize`.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NotPSDError, RankError

PSD_TOL = 1e-12
RANK_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric positive semidefinite ``p x p`` matrix of inner products.

    Parameters
    ----------
    entries : array_like, shape (p, p)
    fair : bool
        When set, unit diagonal and the absence of aligned columns are
        enforced at construction.
    """

    entries: np.ndarray
    fair: bool = False
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = _frozen(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"Gram matrix must be square and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("Gram matrix has non-finite entries")
        asym = np.max(np.abs(a - a.T))
        if asym > 1e-12 * max(1.0, np.max(np.abs(a))):
            raise NotPSDError(f"Gram matrix is not symmetric (max asymmetry {asym:.3e})")
        a = _frozen((a + a.T) / 2)
        w = np.linalg.eigvalsh(a)
        if w[0] < -PSD_TOL:
            raise NotPSDError(f"Gram matrix is not PSD: smallest eigenvalue {w[0]:.3e}")
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "eigenvalues", _frozen(np.clip(w, 0.0, None)))
        if self.fair:
            verdict = check_fair(a)
            if not verdict.fair:
                raise ValueError(f"Gram matrix flagged fair but {verdict.reason}")

    @property
    def p(self):
        return self.entries.shape[0]

    @property
    def rank(self):
        w = self.eigenvalues
        return int(np.sum(w > RANK_TOL * max(1.0, w[-1])))

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def submatrix(self, rows, cols=None):
        rows = np.asarray(rows, dtype=int)
        cols = rows if cols is None else np.asarray(cols, dtype=int)
        return self.entries[np.ix_(rows, cols)]

    def quad(self, v):
        """Return ``v^T Sigma v``."""
        v = np.asarray(v, dtype=float)
        return float(v @ self.entries @ v)


def as_gram(g):
    """Coerce an array or :class:`GramMatrix` to :class:`GramMatrix`."""
    return g if isinstance(g, GramMatrix) else GramMatrix(g)


@dataclass(frozen=True)
class DesignFactor:
    """Explicit design ``X`` (shape ``n x p``) with ``X^T X`` equal to a Gram matrix."""

    columns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", _frozen(self.columns))

    @property
    def n(self):
        return self.columns.shape[0]

    @property
    def p(self):
        return self.columns.shape[1]

    def gram(self):
        X = self.columns
        return X.T @ X

    def column_norms(self):
        return np.linalg.norm(self.columns, axis=0)


def factorize(gram, n=None):
    """Realise a design ``X`` with ``X^T X = Sigma``.

    With ``n`` equal to ``p`` (or larger) the symmetric square root is used,
    padded with zero rows; otherwise the top ``rank`` scaled eigenvectors
    are stacked as rows.  Eigenvalues are sorted in decreasing order and
    each eigenvector is signed so that its first non-negligible entry is
    positive, which makes the result reproducible.
    """
    g = as_gram(gram)
    r = g.rank
    if n is None:
        n = r
    n = int(n)
    if n < r:
        raise RankError(f"n={n} is smaller than rank(Sigma)={r}")
    w, V = np.linalg.eigh(g.entries)
    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], 0.0, None)
    V = V[:, order]
    for k in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, k]) > 1e-12)
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    p = g.p
    if n >= p:
        root = (V * np.sqrt(w)) @ V.T
        X = np.vstack([root, np.zeros((n - p, p))])
    else:
        X = np.sqrt(w[:r])[:, None] * V[:, :r].T
        X = np.vstack([X, np.zeros((n - r, p))])
    return DesignFactor(X)


@dataclass(frozen=True)
class FairnessVerdict:
    normalized: bool
    no_aligned_columns: bool
    unnormalized_column: int = None
    aligned_pair: tuple = None

    @property
    def fair(self):
        return self.normalized and self.no_aligned_columns

    @property
    def reason(self):
        if self.fair:
            return "fair"
        parts = []
        if not self.normalized:
            parts.append(f"column {self.unnormalized_column} is not normalized")
        if not self.no_aligned_columns:
            j, k = self.aligned_pair
            parts.append(f"columns {j} and {k} are aligned")
        return "; ".join(parts)


def check_fair(gram, tol=1e-10):
    """Check normalized columns and absence of aligned column pairs.

    Indices in the verdict are 0-based.  Alignment is detected through the
    Cauchy-Schwarz equality ``|S_jk| = sqrt(S_jj S_kk)`` so unnormalized
    designs are handled too.
    """
    a = np.asarray(gram, dtype=float)
    d = np.diag(a)
    bad = np.flatnonzero(np.abs(d - 1.0) > tol)
    normalized = bad.size == 0
    pair = None
    p = a.shape[0]
    for j in range(p):
        for k in range(j + 1, p):
            scale = np.sqrt(max(d[j], 0.0) * max(d[k], 0.0))
            if abs(abs(a[j, k]) - scale) <= tol * max(1.0, scale):
                pair = (j, k)
                break
        if pair is not None:
            break
    return FairnessVerdict(
        normalized=normalized,
        no_aligned_columns=pair is None,
        unnormalized_column=int(bad[0]) if bad.size else None,
        aligned_pair=pair,
    )


def read_matrix_csv(path):
    """Read a headerless comma-separated matrix."""
    a = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    return a


def write_matrix_csv(path, a):
    np.savetxt(Path(path), np.asarray(a, dtype=float), delimiter=",", fmt="%.17g")
