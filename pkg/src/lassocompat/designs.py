"""Parametric design families and their exact Gram matrices.

Every family is defined by how its columns are built from a pair of
negatively correlated active columns ``X_1, X_2`` (inner product
``-rho``, ``varphi2 = 1 - rho``) plus auxiliary vectors orthogonal to
them.  The Gram matrices below are the closed-form inner products of those
constructions; no random vectors are involved.

Indices are 0-based throughout the Python API.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AdmissibilityError
from .gram import GramMatrix, read_matrix_csv

FAMILIES = (
    "TwoVar",
    "PairBlocks",
    "PairBlocksPlusOrthogonal",
    "ParentChildSingle",
    "ParentChildMany",
    "ParentChildBlock2N",
    "GoodComp",
    "GoodLasso2",
    "GoodLasso3",
    "BlockGoodComp2N",
    "ChildParentGamma",
    "ChildParentSym",
    "ChildParentOrthoInactive",
    "Custom",
)

# parameter names accepted by each family (lists are 1-d sequences)
PARAMS = {
    "TwoVar": ("rho",),
    "PairBlocks": ("rhos",),
    "PairBlocksPlusOrthogonal": ("rho", "m0"),
    "ParentChildSingle": ("rho", "C"),
    "ParentChildMany": ("rho", "Cs"),
    "ParentChildBlock2N": ("rhos", "C"),
    "GoodComp": ("rho", "C", "tau2"),
    "GoodLasso2": ("rho", "C"),
    "GoodLasso3": ("rho",),
    "BlockGoodComp2N": ("rhos", "Cs", "tau2s"),
    "ChildParentGamma": ("theta", "gamma3"),
    "ChildParentSym": ("theta", "C"),
    "ChildParentOrthoInactive": ("C", "gamma"),
    "Custom": ("matrix",),
}

_LIST_PARAMS = {"rhos", "Cs", "tau2s", "gamma", "matrix"}

# short names used on the command line
ALIASES = {
    "twovar": "TwoVar",
    "pairblocks": "PairBlocks",
    "pairblocks-orthogonal": "PairBlocksPlusOrthogonal",
    "parentchild": "ParentChildSingle",
    "parentchild-many": "ParentChildMany",
    "parentchild-block": "ParentChildBlock2N",
    "goodcomp": "GoodComp",
    "goodlasso2": "GoodLasso2",
    "goodlasso3": "GoodLasso3",
    "blockgoodcomp": "BlockGoodComp2N",
    "childparent-gamma": "ChildParentGamma",
    "childparent-sym": "ChildParentSym",
    "childparent-ortho": "ChildParentOrthoInactive",
    "custom": "Custom",
}


def _require(cond, message):
    if not cond:
        raise AdmissibilityError(message)


def _check_rho(rho, name="rho"):
    _require(0.0 < rho < 1.0, f"{name} must lie in (0, 1), got {rho!r}")


@dataclass(frozen=True)
class DesignSpec:
    """A design family plus its parameters.

    ``params`` keys follow :data:`PARAMS`.  Sequence-valued parameters are
    stored as tuples so specs are hashable.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        fam = ALIASES.get(self.family, self.family)
        if fam not in FAMILIES:
            raise ValueError(f"unknown design family {self.family!r}")
        object.__setattr__(self, "family", fam)
        clean = {}
        for key, value in dict(self.params).items():
            if key not in PARAMS[fam]:
                raise ValueError(f"family {fam} has no parameter {key!r}")
            if key == "matrix":
                clean[key] = tuple(tuple(float(x) for x in row) for row in value)
            elif key in _LIST_PARAMS:
                clean[key] = tuple(float(x) for x in np.atleast_1d(value))
            elif key == "m0":
                clean[key] = int(value)
            else:
                clean[key] = float(value)
        missing = [k for k in PARAMS[fam] if k not in clean]
        if missing:
            raise ValueError(f"family {fam} is missing parameters {missing}")
        object.__setattr__(self, "params", clean)

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def __getitem__(self, key):
        return self.params[key]

    def to_dict(self):
        out = {}
        for k, v in self.params.items():
            out[k] = [list(r) for r in v] if k == "matrix" else (list(v) if isinstance(v, tuple) else v)
        return {"family": self.family, "params": out}

    @property
    def p(self):
        return _dimension(self)

    @property
    def active_set(self):
        """The family's canonical active set S_0."""
        return canonical_active_set(self)


def _dimension(spec):
    f, q = spec.family, spec.params
    if f == "TwoVar":
        return 2
    if f == "PairBlocks":
        return 2 * len(q["rhos"])
    if f == "PairBlocksPlusOrthogonal":
        return 2 + q["m0"]
    if f == "ParentChildSingle":
        return 3
    if f == "ParentChildMany":
        return 2 + len(q["Cs"])
    if f == "ParentChildBlock2N":
        return 2 * len(q["rhos"]) + 1
    if f in ("GoodComp", "GoodLasso2", "GoodLasso3", "ChildParentGamma", "ChildParentSym"):
        return 4
    if f == "BlockGoodComp2N":
        return 4 * len(q["rhos"])
    if f == "ChildParentOrthoInactive":
        return 2 + len(q["gamma"])
    return len(q["matrix"])


def canonical_active_set(spec):
    f, p = spec.family, spec.p
    if f == "PairBlocks":
        return tuple(range(p))
    if f == "ParentChildBlock2N":
        return tuple(range(p - 1))
    if f == "BlockGoodComp2N":
        return tuple(range(p // 2))
    if f == "Custom":
        return tuple(range(p))
    return (0, 1)


# ---------------------------------------------------------------- checks

def check_admissible(spec):
    """Raise :class:`AdmissibilityError` naming the first violated constraint."""
    f, q = spec.family, spec.params
    if f == "Custom":
        return
    if "rho" in q:
        _check_rho(q["rho"])
    if "rhos" in q:
        _require(len(q["rhos"]) >= 1, "at least one block is required")
        for k, r in enumerate(q["rhos"]):
            _check_rho(r, f"rho_{k + 1}")
    if f == "PairBlocksPlusOrthogonal":
        _require(q["m0"] >= 0, "m0 must be non-negative")
    elif f in ("ParentChildSingle", "GoodLasso2", "GoodComp"):
        C, phi2 = q["C"], 1 - q["rho"]
        _require(C > 1, f"C must exceed 1, got {C!r}")
        _require(C * C * phi2 / 2 < 1, "C²φ̂²/2 ≥ 1")
        if f == "GoodComp":
            t = q["tau2"]
            _require(t > 0, "τ̂² must be positive")
            _require(t < 1 - C * C * phi2 / 2, "τ̂² ≥ 1 − C²φ̂²/2")
    elif f == "ParentChildMany":
        phi2 = 1 - q["rho"]
        _require(len(q["Cs"]) >= 1, "at least one inactive column is required")
        for k, C in enumerate(q["Cs"]):
            _require(C > 1, f"C_{k + 1} must exceed 1")
            _require(C * C * phi2 / 2 < 1, f"C_{k + 1}²φ̂²/2 ≥ 1")
    elif f == "ParentChildBlock2N":
        C = q["C"]
        phi2 = 1 - np.asarray(q["rhos"])
        s0 = 2 * len(phi2)
        _require(C > 1, f"C must exceed 1, got {C!r}")
        _require(C * C * np.sum(2 * phi2) / s0 ** 2 < 1, "C² Σ 2φ̂_k² / s₀² ≥ 1")
    elif f == "BlockGoodComp2N":
        N = len(q["rhos"])
        _require(len(q["Cs"]) == N and len(q["tau2s"]) == N, "rhos, Cs and tau2s must have equal length")
        for k in range(N):
            C, phi2, t = q["Cs"][k], 1 - q["rhos"][k], q["tau2s"][k]
            _require(C > 1, f"C_{k + 1} must exceed 1")
            _require(C * C * phi2 / 2 < 1, f"C_{k + 1}²φ̂_{k + 1}²/2 ≥ 1")
            _require(t > 0, f"τ̂_{k + 1}² must be positive")
            _require(t < 1 - C * C * phi2 / 2, f"τ̂_{k + 1}² ≥ 1 − C_{k + 1}²φ̂_{k + 1}²/2")
    elif f == "ChildParentGamma":
        th, g3 = q["theta"], q["gamma3"]
        _require(0 < th < 1, "θ̂ must lie in (0, 1)")
        _require(0.5 < g3 < 1, "γ₃ must lie in (1/2, 1)")
        rho = _child_parent_gamma_rho(th, g3)
        _require(rho > 0, "ρ̂ = −1 + 4γ₃γ₄(1+θ̂) must be positive")
    elif f == "ChildParentSym":
        th, C = q["theta"], q["C"]
        psi2 = 1 - th
        _require(0 < th < 1, "θ̂ must lie in (0, 1)")
        _require(C > 1, f"C must exceed 1, got {C!r}")
        _require(C * C * psi2 / 2 < 1, "C²ψ̂²/2 ≥ 1")
        _require(C * C * psi2 < 1, "ρ̂ = 1 − C²ψ̂² must be positive (C²ψ̂² ≥ 1)")
    elif f == "ChildParentOrthoInactive":
        C = q["C"]
        g = np.asarray(q["gamma"])
        n2 = float(g @ g)
        _require(C > 0, "C must be positive")
        _require(abs(np.abs(g).sum() - 1) <= 1e-12, "‖γ‖₁ must equal 1")
        _require(2 * C * C * n2 < 1, "2C²‖γ‖₂² ≥ 1")
        _require(np.abs(g).max() <= C * n2 + 1e-15, "‖γ‖∞ > C‖γ‖₂²")


def _child_parent_gamma_rho(theta, g3):
    g4 = 1 - g3
    return -1 + 4 * g3 * g4 * (1 + theta)


# ---------------------------------------------------------------- builders

def _two_block(rho):
    return np.array([[1.0, -rho], [-rho, 1.0]])


def _goodcomp_block(rho, C, tau2):
    phi2 = 1 - rho
    a = C * phi2 / 2
    t = C * C * phi2 + 2 * tau2 - 1
    return np.array([
        [1.0, -rho, a, a],
        [-rho, 1.0, a, a],
        [a, a, 1.0, t],
        [a, a, t, 1.0],
    ])


def build_gram(spec):
    """Exact Gram matrix implied by ``spec``.

    Raises
    ------
    AdmissibilityError
        If the parameters violate the family's constraints.
    """
    check_admissible(spec)
    f, q = spec.family, spec.params
    if f == "TwoVar":
        G = _two_block(q["rho"])
    elif f == "PairBlocks":
        N = len(q["rhos"])
        G = np.zeros((2 * N, 2 * N))
        for k, r in enumerate(q["rhos"]):
            G[2 * k:2 * k + 2, 2 * k:2 * k + 2] = _two_block(r)
    elif f == "PairBlocksPlusOrthogonal":
        G = np.eye(2 + q["m0"])
        G[:2, :2] = _two_block(q["rho"])
    elif f == "ParentChildSingle":
        G = _parent_child(q["rho"], [q["C"]])
    elif f == "ParentChildMany":
        G = _parent_child(q["rho"], q["Cs"])
    elif f == "ParentChildBlock2N":
        rhos = np.asarray(q["rhos"])
        N = len(rhos)
        s0 = 2 * N
        C = q["C"]
        G = np.eye(s0 + 1)
        for k, r in enumerate(rhos):
            G[2 * k:2 * k + 2, 2 * k:2 * k + 2] = _two_block(r)
            G[2 * k:2 * k + 2, s0] = G[s0, 2 * k:2 * k + 2] = C * (1 - r) / s0
    elif f == "GoodComp":
        G = _goodcomp_block(q["rho"], q["C"], q["tau2"])
    elif f == "GoodLasso2":
        G = _goodcomp_block(q["rho"], q["C"], 0.0)
    elif f == "GoodLasso3":
        G = _goodcomp_block(q["rho"], 1.0, 0.0)
    elif f == "BlockGoodComp2N":
        N = len(q["rhos"])
        G = np.zeros((4 * N, 4 * N))
        for k in range(N):
            B = _goodcomp_block(q["rhos"][k], q["Cs"][k], q["tau2s"][k])
            idx = [2 * k, 2 * k + 1, 2 * N + 2 * k, 2 * N + 2 * k + 1]
            G[np.ix_(idx, idx)] = B
    elif f == "ChildParentGamma":
        th, g3 = q["theta"], q["gamma3"]
        g4 = 1 - g3
        rho = _child_parent_gamma_rho(th, g3)
        r3 = g3 - g4 * th
        r4 = g4 - g3 * th
        G = np.array([
            [1.0, -rho, r3, r4],
            [-rho, 1.0, r3, r4],
            [r3, r3, 1.0, -th],
            [r4, r4, -th, 1.0],
        ])
    elif f == "ChildParentSym":
        th, C = q["theta"], q["C"]
        psi2 = 1 - th
        rho = 1 - C * C * psi2
        a = C * psi2 / 2
        G = np.array([
            [1.0, -rho, a, a],
            [-rho, 1.0, a, a],
            [a, a, 1.0, -th],
            [a, a, -th, 1.0],
        ])
    elif f == "ChildParentOrthoInactive":
        C = q["C"]
        g = np.asarray(q["gamma"])
        m0 = len(g)
        rho = 1 - 2 * C * C * float(g @ g)
        G = np.eye(2 + m0)
        G[:2, :2] = _two_block(rho)
        G[0, 2:] = G[1, 2:] = C * g
        G[2:, 0] = G[2:, 1] = C * g
    else:
        G = np.asarray(q["matrix"], dtype=float)
    return GramMatrix(G)


def _parent_child(rho, Cs):
    phi2 = 1 - rho
    Cs = np.asarray(Cs, dtype=float)
    m = len(Cs)
    G = np.eye(2 + m)
    G[:2, :2] = _two_block(rho)
    G[0, 2:] = G[1, 2:] = Cs * phi2 / 2
    G[2:, 0] = G[2:, 1] = Cs * phi2 / 2
    cross = np.outer(Cs, Cs) * phi2 / 2
    off = ~np.eye(m, dtype=bool)
    G[2:, 2:][off] = cross[off]
    return G


# ---------------------------------------------------------------- sampling

def sample_spec(family, rng, size=None):
    """Draw admissible parameters for ``family`` uniformly-ish at random.

    ``size`` controls the number of blocks / inactive columns where the
    family has one (defaults to 1 or 2).
    """
    u = rng.uniform
    if family == "TwoVar":
        return DesignSpec(family, {"rho": u(0.05, 0.95)})
    if family == "PairBlocks":
        N = size or int(rng.integers(1, 3))
        return DesignSpec(family, {"rhos": u(0.05, 0.95, N)})
    if family == "PairBlocksPlusOrthogonal":
        return DesignSpec(family, {"rho": u(0.05, 0.95), "m0": size or int(rng.integers(1, 3))})
    if family in ("ParentChildSingle", "GoodLasso2"):
        rho = u(0.05, 0.95)
        cmax = np.sqrt(2 / (1 - rho))
        return DesignSpec(family, {"rho": rho, "C": u(1.05, 1 + 0.95 * (cmax - 1))})
    if family == "ParentChildMany":
        m = size or int(rng.integers(1, 3))
        rho = u(0.05, 0.95)
        cmax = np.sqrt(2 / (1 - rho))
        return DesignSpec(family, {"rho": rho, "Cs": u(1.05, 1 + 0.95 * (cmax - 1), m)})
    if family == "ParentChildBlock2N":
        N = size or int(rng.integers(1, 3))
        rhos = u(0.05, 0.95, N)
        s0 = 2 * N
        cmax = np.sqrt(s0 ** 2 / np.sum(2 * (1 - rhos)))
        return DesignSpec(family, {"rhos": rhos, "C": u(1.05, 1 + 0.95 * (cmax - 1))})
    if family == "GoodComp":
        rho, C, t = _goodcomp_draw(rng)
        return DesignSpec(family, {"rho": rho, "C": C, "tau2": t})
    if family == "GoodLasso3":
        return DesignSpec(family, {"rho": u(0.05, 0.95)})
    if family == "BlockGoodComp2N":
        N = size or int(rng.integers(1, 3))
        draws = [_goodcomp_draw(rng) for _ in range(N)]
        return DesignSpec(family, {
            "rhos": [d[0] for d in draws], "Cs": [d[1] for d in draws], "tau2s": [d[2] for d in draws]})
    if family == "ChildParentGamma":
        while True:
            th, g3 = u(0.05, 0.95), u(0.51, 0.95)
            if _child_parent_gamma_rho(th, g3) > 0.02:
                return DesignSpec(family, {"theta": th, "gamma3": g3})
    if family == "ChildParentSym":
        th = u(0.05, 0.9)
        psi2 = 1 - th
        cmax = min(np.sqrt(1 / psi2), np.sqrt(2 / psi2))
        if cmax <= 1.05:
            return sample_spec(family, rng, size)
        return DesignSpec(family, {"theta": th, "C": u(1.02, 1 + 0.95 * (cmax - 1))})
    if family == "ChildParentOrthoInactive":
        # admissibility needs 2 ||gamma||_inf^2 < ||gamma||_2^2, so m0 >= 3
        m0 = max(size or int(rng.integers(3, 5)), 3)
        while True:
            g = rng.dirichlet(np.full(m0, 4.0))
            n2 = float(g @ g)
            clo = max(g.max() / n2, 1.0)
            chi = np.sqrt(1 / (2 * n2))
            if chi > clo * 1.02:
                return DesignSpec(family, {"C": u(clo * 1.01, clo + 0.95 * (chi - clo)), "gamma": g})
    raise ValueError(f"cannot sample family {family!r}")


def _goodcomp_draw(rng):
    rho = rng.uniform(0.05, 0.95)
    phi2 = 1 - rho
    cmax = np.sqrt(2 / phi2)
    C = rng.uniform(1.05, 1 + 0.95 * (cmax - 1))
    room = 1 - C * C * phi2 / 2
    return rho, C, rng.uniform(0.05, 0.95) * room


# ---------------------------------------------------------------- file IO

def load_spec(path):
    """Read a design spec from JSON ``{"family": ..., "params": {...}}``.

    A Custom spec may name a CSV file via ``params.matrix_file`` (resolved
    relative to the JSON file).
    """
    path = Path(path)
    data = json.loads(path.read_text())
    params = dict(data.get("params", {}))
    if "matrix_file" in params:
        params["matrix"] = read_matrix_csv(path.parent / params.pop("matrix_file")).tolist()
    return DesignSpec(data["family"], params)


def dump_spec(spec, path):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
