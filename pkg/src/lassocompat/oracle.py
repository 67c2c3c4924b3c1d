"""Closed-form noiseless Lasso solutions for the structured design families.

Each family has an explicit minimiser once the active coefficients are
large enough.  :func:`closed_form` returns it together with the prediction
and penalized errors, and refuses (``applicable=False``) when the size
condition fails.  Every returned solution is re-certified through its KKT
residual before it is handed out.
"""
from dataclasses import dataclass, field

import numpy as np

from .designs import DesignSpec, build_gram
from .errors import UnsupportedFamily
from .solver import kkt_residual

KKT_TOL = 1e-10


@dataclass(frozen=True)
class OracleSolution:
    beta_star: np.ndarray
    case_id: str
    prediction_error: float
    penalized_error: float
    applicable: bool
    applicability_reason: str
    family_constants: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def _na(p, reason, consts, case_id="n/a"):
    return OracleSolution(np.full(p, np.nan), case_id, np.nan, np.nan, False, reason, consts)


# ---------------------------------------------------------------- constants

def l1_ball_distance2(v, radius=1.0, iters=200):
    """Squared distance from ``v`` to the l1 ball, via bisection on the threshold."""
    a = np.abs(np.asarray(v, dtype=float))
    if a.sum() <= radius:
        return 0.0
    lo, hi = 0.0, a.max()
    for _ in range(iters):
        t = 0.5 * (lo + hi)
        if np.maximum(a - t, 0.0).sum() > radius:
            lo = t
        else:
            hi = t
    t = 0.5 * (lo + hi)
    proj = np.maximum(a - t, 0.0)
    return float(np.sum((a - proj) ** 2))


def closed_form_family_constants(spec):
    """Derived constants of a family: ``phi2_S0`` (compatibility of S_0),
    ``Gamma2_S0`` (effective sparsity) and auxiliary quantities.

    Raises
    ------
    UnsupportedFamily
        For the Custom family.
    """
    if not isinstance(spec, DesignSpec):
        raise TypeError("spec must be a DesignSpec")
    build_gram(spec)  # admissibility
    f, q = spec.family, spec.params
    out = {}
    if f == "Custom":
        raise UnsupportedFamily("no closed form for Custom designs")
    if f in ("TwoVar", "PairBlocksPlusOrthogonal"):
        rho = q["rho"]
        phi2 = 1 - rho
        out.update(varphi2=phi2, phi2_S0=phi2, phi2_first=1 - rho ** 2, lambda_min=phi2)
    elif f == "PairBlocks":
        rhos = np.asarray(q["rhos"])
        phi2 = 1 - rhos
        N = rhos.size
        out.update(varphi2=tuple(phi2), phi2_S0=N / np.sum(1 / phi2),
                   phi2_evens=N / np.sum(1 / (1 - rhos ** 2)), lambda_min=float(phi2.min()),
                   kappa2_S0=float(phi2.min()))
    elif f in ("ParentChildSingle", "ParentChildMany"):
        phi2 = 1 - q["rho"]
        Cs = np.array([q["C"]]) if f == "ParentChildSingle" else np.asarray(q["Cs"])
        tau2 = 1 - Cs ** 2 * phi2 / 2
        gamma2 = 2 / phi2 + np.sum(Cs ** 2 / tau2)
        out.update(varphi2=phi2, phi2_S0=2 / gamma2, inv_tau2_l1=float(np.sum(1 / tau2)))
        out["tau2"] = float(tau2[0]) if f == "ParentChildSingle" else tuple(tau2)
    elif f == "ParentChildBlock2N":
        phi2 = 1 - np.asarray(q["rhos"])
        s0 = 2 * phi2.size
        C = q["C"]
        tau2 = 1 - C * C * np.sum(2 * phi2) / s0 ** 2
        gamma2 = 2 * np.sum(1 / phi2) + C * C / tau2
        out.update(varphi2=tuple(phi2), tau2=tau2, phi2_S0=s0 / gamma2, inv_tau2_l1=1 / tau2)
    elif f == "GoodComp":
        phi2, C, t = 1 - q["rho"], q["C"], q["tau2"]
        val = phi2 * t / (C * C * phi2 / 2 + t)
        out.update(varphi2=phi2, tau2=t, phi2_S0=val, inv_tau2_l1=1 / t)
        gamma2 = 2 / val
    elif f in ("GoodLasso2", "GoodLasso3"):
        out.update(varphi2=1 - q["rho"], phi2_S0=0.0)
    elif f == "BlockGoodComp2N":
        phi2 = 1 - np.asarray(q["rhos"])
        Cs, t = np.asarray(q["Cs"]), np.asarray(q["tau2s"])
        gamma2 = float(np.sum(2 / phi2 + Cs ** 2 / t))
        out.update(varphi2=tuple(phi2), tau2=tuple(t), phi2_S0=2 * phi2.size / gamma2,
                   inv_tau2_l1=float(np.sum(1 / t)))
    elif f == "ChildParentGamma":
        th, g3 = q["theta"], q["gamma3"]
        g4 = 1 - g3
        rho = -1 + 4 * g3 * g4 * (1 + th)
        out.update(psi2=1 - th, rho=rho, varphi2=1 - rho, varrho3=g3 - th * g4,
                   varrho4=g4 - th * g3, gamma4=g4, phi2_S0=0.0)
    elif f == "ChildParentSym":
        psi2, C = 1 - q["theta"], q["C"]
        out.update(psi2=psi2, varphi2=C * C * psi2, rho=1 - C * C * psi2,
                   phi2_S0=(C - 1) ** 2 * psi2)
    elif f == "ChildParentOrthoInactive":
        C = q["C"]
        g = np.asarray(q["gamma"])
        out.update(varphi2=2 * C * C * float(g @ g), phi2_S0=2 * l1_ball_distance2(C * g))
    val = out["phi2_S0"]
    s0 = len(spec.active_set)
    out["Gamma2_S0"] = s0 / val if val > 0 else np.inf
    return out


def coefficient_threshold(spec, lam):
    """Smallest admissible value of the second active coefficient on each block.

    For the block families the returned value applies to every block (a
    tuple is returned when blocks differ).
    """
    f, q = spec.family, spec.params
    k = closed_form_family_constants(spec)
    if f in ("TwoVar", "PairBlocksPlusOrthogonal", "GoodLasso3", "ChildParentSym",
             "ChildParentOrthoInactive"):
        return lam / k["varphi2"]
    if f == "PairBlocks":
        return tuple(lam / np.asarray(k["varphi2"]))
    if f == "ParentChildSingle":
        C = q["C"]
        return lam / k["varphi2"] + lam * C * (C - 1) / (2 * k["tau2"])
    if f == "ParentChildMany":
        Cs = np.asarray(q["Cs"])
        b = lam * (Cs - 1) / np.asarray(k["tau2"])
        return lam / k["varphi2"] + float(np.sum(Cs * b)) / 2
    if f == "ParentChildBlock2N":
        C = q["C"]
        phi2 = np.asarray(k["varphi2"])
        b = lam * (C - 1) / k["tau2"]
        return tuple(lam / phi2 + C * b / (2 * phi2.size))
    if f == "GoodComp":
        C = q["C"]
        return lam / k["varphi2"] + lam * C * (C - 1) / (2 * k["tau2"])
    if f == "BlockGoodComp2N":
        Cs, t = np.asarray(q["Cs"]), np.asarray(q["tau2s"])
        return tuple(lam / np.asarray(k["varphi2"]) + lam * Cs * (Cs - 1) / (2 * t))
    if f == "GoodLasso2":
        # sufficient for a non-negative inactive coefficient in both regimes
        return lam / (q["C"] * k["varphi2"])
    if f == "ChildParentGamma":
        return lam / (k["psi2"] * 2 * k["gamma4"])
    raise UnsupportedFamily(f"no threshold for {f}")


def sample_beta0(spec, lam, rng, spread=1.0):
    """Random ``beta0`` satisfying the family's coefficient-size condition.

    On each active block the second coefficient is the threshold plus a
    uniform draw on ``[0, spread)`` and the first exceeds it by another
    such draw.
    """
    p = spec.p
    beta0 = np.zeros(p)
    S = list(spec.active_set)
    thr = np.atleast_1d(coefficient_threshold(spec, lam))
    for k in range(len(S) // 2):
        t = thr[k] if thr.size > 1 else thr[0]
        b2 = t + rng.uniform(0, spread) + 1e-9
        beta0[S[2 * k]] = b2 + rng.uniform(0, spread)
        beta0[S[2 * k + 1]] = b2
    return beta0


# ---------------------------------------------------------------- per family

def _two_var(rho, b1, b2, lam):
    """Exact solution on one 2x2 block with 0 < b2 <= b1 (assumed)."""
    phi2 = 1 - rho
    t = lam / phi2
    if t <= b2:
        return np.array([b1 - t, b2 - t]), "Case1", 2 * lam * lam / phi2
    if t <= b2 + (b1 - b2) / phi2:
        return np.array([b1 - rho * b2 - lam, 0.0]), "Case2", phi2 * (2 - phi2) * b2 * b2 + lam * lam
    return np.zeros(2), "Case3", b1 * b1 + b2 * b2 - 2 * rho * b1 * b2


def _ordered_pair(b, i, j):
    """Return block coefficients with the larger first, plus the index order."""
    if b[i] >= b[j]:
        return b[i], b[j], (i, j)
    return b[j], b[i], (j, i)


def _solve_pair_blocks(rhos, beta0, lam, pairs):
    beta = np.zeros_like(beta0)
    cases, pred = [], 0.0
    for rho, (i, j) in zip(rhos, pairs):
        b1, b2, (a, c) = _ordered_pair(beta0, i, j)
        if b2 <= 0:
            return None, f"block ({i + 1},{j + 1}) needs positive coefficients", None
        sol, case, pe = _two_var(rho, b1, b2, lam)
        beta[a], beta[c] = sol
        cases.append(case)
        pred += pe
    return beta, "/".join(cases), pred


def closed_form(spec, beta0, lam):
    """Exact minimiser for ``spec`` at ``beta0`` and ``lam``.

    Parameters
    ----------
    spec : DesignSpec
    beta0 : array_like
        True coefficients; the family's active coordinates must be positive
        and its inactive ones zero.
    lam : float
        Positive tuning parameter.

    Returns
    -------
    OracleSolution
    """
    gram = build_gram(spec)
    G = gram.entries
    p = gram.p
    beta0 = np.asarray(beta0, dtype=float).ravel()
    if beta0.size != p:
        raise ValueError(f"beta0 has {beta0.size} entries, design has p={p}")
    consts = closed_form_family_constants(spec)
    f, q = spec.family, spec.params
    S0 = np.asarray(spec.active_set)
    off = np.setdiff1d(np.arange(p), S0)
    if not lam > 0:
        return _na(p, "lambda must be positive", consts)
    if np.any(beta0[S0] <= 0):
        return _na(p, "active coefficients must be positive", consts)
    if f not in ("PairBlocksPlusOrthogonal",) and np.any(beta0[off] != 0):
        return _na(p, "coefficients outside the active set must be zero", consts)

    meta = {}
    formula = None  # closed-form penalized error, when one is known
    case = "closed"
    if f == "TwoVar":
        b1, b2, (a, c) = _ordered_pair(beta0, 0, 1)
        sol, case, formula = _two_var(q["rho"], b1, b2, lam)
        beta = np.zeros(2)
        beta[a], beta[c] = sol
    elif f == "PairBlocks":
        N = len(q["rhos"])
        beta, case, formula = _solve_pair_blocks(q["rhos"], beta0, lam,
                                                 [(2 * k, 2 * k + 1) for k in range(N)])
        if beta is None:
            return _na(p, case, consts)
    elif f == "PairBlocksPlusOrthogonal":
        beta, case, formula = _solve_pair_blocks([q["rho"]], beta0, lam, [(0, 1)])
        if beta is None:
            return _na(p, case, consts)
        rest = beta0[2:]
        beta[2:] = np.sign(rest) * np.maximum(np.abs(rest) - lam, 0.0)
        formula = None if np.any(rest != 0) else formula
    elif f in ("ParentChildSingle", "ParentChildMany"):
        phi2 = consts["varphi2"]
        Cs = np.array([q["C"]]) if f == "ParentChildSingle" else np.asarray(q["Cs"])
        tau2 = 1 - Cs ** 2 * phi2 / 2
        b = lam * (Cs - 1) / tau2
        delta = lam / phi2 + float(np.sum(Cs * b)) / 2
        if min(beta0[0], beta0[1]) < delta:
            return _na(p, f"needs min(beta0_1, beta0_2) >= {delta:.17g}", consts)
        beta = np.concatenate([beta0[:2] - delta, b])
        formula = 2 * lam ** 2 / phi2 + lam ** 2 * float(np.sum((Cs ** 2 - 1) / tau2))
        meta["delta"] = delta
    elif f == "ParentChildBlock2N":
        phi2 = np.asarray(consts["varphi2"])
        N = phi2.size
        s0 = 2 * N
        C, tau2 = q["C"], consts["tau2"]
        b = lam * (C - 1) / tau2
        deltas = lam / phi2 + C * b / s0
        beta = np.zeros(p)
        for k in range(N):
            blk = beta0[2 * k:2 * k + 2]
            if blk.min() < deltas[k]:
                return _na(p, f"block {k + 1} needs both coefficients >= {deltas[k]:.17g}", consts)
            beta[2 * k:2 * k + 2] = blk - deltas[k]
        beta[s0] = b
        formula = 2 * lam ** 2 * float(np.sum(1 / phi2)) + lam ** 2 * (C * C - 1) / tau2
        meta["delta"] = tuple(deltas)
    elif f in ("GoodComp", "BlockGoodComp2N"):
        if f == "GoodComp":
            rhos, Cs, taus = [q["rho"]], [q["C"]], [q["tau2"]]
        else:
            rhos, Cs, taus = q["rhos"], q["Cs"], q["tau2s"]
        N = len(rhos)
        beta = np.zeros(p)
        formula = 0.0
        for k in range(N):
            phi2, C, t = 1 - rhos[k], Cs[k], taus[k]
            b = lam * (C - 1) / (2 * t)
            delta = lam / phi2 + C * b
            i1, i2, j1, j2 = 2 * k, 2 * k + 1, 2 * N + 2 * k, 2 * N + 2 * k + 1
            if min(beta0[i1], beta0[i2]) < delta:
                return _na(p, f"block {k + 1} needs both coefficients >= {delta:.17g}", consts)
            beta[i1], beta[i2] = beta0[i1] - delta, beta0[i2] - delta
            beta[j1] = beta[j2] = b
            formula += 2 * lam ** 2 / phi2 + lam ** 2 * (C * C - 1) / t
    elif f == "GoodLasso2":
        beta, case, reason, meta = _good_lasso2(q["rho"], q["C"], beta0, lam)
        if beta is None:
            return _na(p, reason, consts)
    elif f == "GoodLasso3":
        phi2 = consts["varphi2"]
        b1, b2 = beta0[0], beta0[1]
        if b1 < b2:
            return _na(p, "needs beta0_1 >= beta0_2", consts)
        hi = b2 - lam / phi2
        if hi < 0:
            return _na(p, f"needs beta0_2 >= lambda/varphi2 = {lam / phi2:.17g}", consts)
        beta = np.array([b1 - lam / phi2, b2 - lam / phi2, 0.0, 0.0])
        meta.update(nonunique=True, beta3_interval=(0.0, hi),
                    direction=(1.0, 1.0, -1.0, -1.0),
                    penalized_upper=4 * lam * b2 - 2 * lam ** 2 / phi2)
        formula = 2 * lam ** 2 / phi2
        case = "family"
    elif f == "ChildParentGamma":
        psi2 = consts["psi2"]
        g3, g4 = q["gamma3"], consts["gamma4"]
        b1, b2 = beta0[0], beta0[1]
        if b1 < b2:
            return _na(p, "needs beta0_1 >= beta0_2", consts)
        if 2 * g4 * b2 < lam / psi2:
            return _na(p, f"needs 2 gamma4 beta0_2 >= lambda/psi2 = {lam / psi2:.17g}", consts)
        beta = np.array([b1 - b2, 0.0, 2 * g3 * b2 - lam / psi2, 2 * g4 * b2 - lam / psi2])
        formula = 4 * lam * b2 - 2 * lam ** 2 / psi2
        meta.update(nonunique=True, direction=(1.0, 1.0, -2 * g3, -2 * g4),
                    lower_gamma3=4 * lam * g3 * b2, stated_gamma4=4 * lam * g4 * b2)
    elif f in ("ChildParentSym", "ChildParentOrthoInactive"):
        phi2 = consts["varphi2"]
        t = lam / phi2
        if min(beta0[0], beta0[1]) < t:
            return _na(p, f"needs min(beta0_1, beta0_2) >= lambda/varphi2 = {t:.17g}", consts)
        beta = np.zeros(p)
        beta[:2] = beta0[:2] - t
        formula = 2 * lam ** 2 / phi2
    else:  # pragma: no cover - guarded by constants
        raise UnsupportedFamily(f)

    d = beta - beta0
    pred = max(float(d @ G @ d), 0.0)
    S0_beta = beta0 != 0
    pen = pred + 2 * lam * float(np.abs(beta[~S0_beta]).sum())
    res = kkt_residual(G, beta0, lam, beta)
    if res >= KKT_TOL:
        return _na(p, f"closed form fails its KKT certificate (residual {res:.3e})", consts, case)
    if formula is not None:
        meta["penalized_formula"] = formula
    meta["kkt_residual"] = res
    beta.setflags(write=False)
    return OracleSolution(beta, case, pred, pen, True, "ok", consts, meta)


def _good_lasso2(rho, C, beta0, lam):
    phi2 = 1 - rho
    b1, b2 = beta0[0], beta0[1]
    meta = {
        # vector and errors as originally stated (not a minimiser)
        "stated_beta": (b1 - b2, 0.0, (b2 - lam / phi2) / C, (b2 - lam / phi2) / C),
        "stated_prediction_error": 2 * lam ** 2 / phi2,
        "stated_penalized_error": 2 * lam * b2,
    }
    if b1 < b2:
        return None, "n/a", "needs beta0_1 >= beta0_2", meta
    gap = 2 * lam * (C - 1) / (C * (1 + rho))
    if b1 - b2 > gap:
        d1, d2 = b2 + gap, b2
        b = ((d1 + d2) / 2 - lam / (C * phi2)) / C
        beta = np.array([b1 - d1, 0.0, b, b])
        case = "split"
    else:
        b = (C * phi2 * (b1 + b2) / 2 - lam) / (C * C * phi2)
        beta = np.array([0.0, 0.0, b, b])
        case = "inactive-only"
    if b < 0:
        return None, case, "needs the inactive coefficient to be non-negative", meta
    return beta, case, "ok", meta
