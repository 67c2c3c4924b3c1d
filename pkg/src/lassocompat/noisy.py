"""Monte Carlo coverage of the noisy-Lasso estimation-error bounds.

With ``Y = X beta0 + eps`` and ``eps ~ N(0, I/n)``, the noisy Lasso
``beta_hat`` is compared to the noiseless solution ``beta_star``.  Two
high-probability bounds on ``||X(beta_hat - beta_star)||_2`` are checked:
one in terms of ``Lambda_max(Sigma_hat)`` and one in terms of an
approximating matrix ``Sigma_0`` under the smallness condition on ``xi``.

Each trial draws its noise from a counter-based generator keyed by
``(seed, trial_index)``, so results do not depend on execution order.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, MissingSigma0
from .gram import as_gram, factorize
from .solver import ProblemInstance, solve_noiseless, solve_noisy


def lambda0(n, p, alpha):
    """Noise level ``sqrt(2 log(2p/alpha) / n)``."""
    return float(np.sqrt(2 * np.log(2 * p / alpha) / n))


@dataclass(frozen=True)
class NoisyConfig:
    """Settings of a coverage experiment.

    ``allow_violation`` lets the experiment run when ``eta * lam`` does not
    exceed ``lambda0``; the resulting report then carries
    ``precondition_holds=False``.
    """

    n: int
    lam: float
    eta: float = 0.5
    alpha: float = 0.05
    alpha1: float = 0.05
    trials: int = 1000
    seed: int = 0
    sigma0: object = None
    allow_violation: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1 or not 0 < self.alpha1 < 1:
            raise ValueError("alpha and alpha1 must lie in (0, 1)")
        if not 0 <= self.eta < 1:
            raise ValueError("eta must lie in [0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.sigma0 is not None:
            object.__setattr__(self, "sigma0", as_gram(self.sigma0))

    def lambda0(self, p):
        return lambda0(self.n, p, self.alpha)

    def precondition_holds(self, p):
        return self.eta * self.lam > self.lambda0(p)

    def check(self, p):
        if not self.precondition_holds(p) and not self.allow_violation:
            raise AdmissibilityError(
                f"eta*lambda = {self.eta * self.lam:.6g} does not exceed "
                f"lambda0 = {self.lambda0(p):.6g}")


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    lhs: float
    rhs: float
    violated: bool
    bias: float
    prediction: float
    triangle_slack: float
    xi: float = 0.0
    xi_condition: bool = True


@dataclass(frozen=True)
class CoverageReport:
    trials: int
    violations: int
    empirical_coverage: float
    nominal: float
    mean_lhs: float
    mean_rhs: float
    xi_condition_failures: int
    precondition_holds: bool
    lambda0: float
    results: tuple = ()


def noise_stream(seed, trial_index):
    """Generator for one trial, keyed by ``(seed, trial_index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial_index)])))


def _columns(factor):
    X = np.asarray(getattr(factor, "columns", factor), dtype=float)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms > 1 + 1e-12):
        j = int(np.argmax(norms))
        raise AdmissibilityError(f"column {j} has norm {norms[j]:.6g} > 1")
    return X


class _Context:
    """Per-instance quantities shared by all trials."""

    def __init__(self, instance, factor, config, beta_star=None):
        self.X = _columns(factor)
        self.n, self.p = self.X.shape
        if self.n != config.n:
            raise ValueError(f"design has n={self.n} rows, config says n={config.n}")
        config.check(self.p)
        if abs(instance.lam - config.lam) > 0:
            raise ValueError("instance and config must use the same lambda")
        self.instance = instance
        self.config = config
        if beta_star is None:
            beta_star = solve_noiseless(instance, tol=1e-12).beta_star
        self.beta_star = np.asarray(beta_star)
        self.mean = self.X @ instance.beta0
        self.bias = float(np.linalg.norm(self.X @ (self.beta_star - instance.beta0)))
        self.sigma_hat = self.X.T @ self.X
        self.lmax = float(np.linalg.eigvalsh(self.sigma_hat)[-1])
        self.tail = float(np.sqrt(2 * np.log(1 / config.alpha1) / self.n))

    def draw(self, trial_index, zero_noise=False):
        if zero_noise:
            return np.zeros(self.n)
        rng = noise_stream(self.config.seed, trial_index)
        return rng.standard_normal(self.n) / np.sqrt(self.n)

    def estimate(self, trial_index, zero_noise=False):
        y = self.mean + self.draw(trial_index, zero_noise)
        bhat = solve_noisy(self.X, y, self.config.lam, tol=1e-10).beta_star
        lhs = float(np.linalg.norm(self.X @ (bhat - self.beta_star)))
        pred = float(np.linalg.norm(self.X @ (bhat - self.instance.beta0)))
        # triangle inequality: pred >= bias - lhs
        return lhs, pred, pred - (self.bias - lhs)


def rhs_empirical(lmax, n, lam, eta, bias, alpha1):
    return float(np.sqrt(lmax / (n * lam ** 2 * (1 - eta) ** 2)) * bias
                 + np.sqrt(2 * np.log(1 / alpha1) / n))


def rhs_sigma0(lmax0, bias, xi, l1_err, lam, eta, n, alpha1):
    """Second bound exactly as displayed (numerator uses ``xi * ||beta* - beta0||_1``)."""
    return float(np.sqrt(lmax0) * np.sqrt(bias ** 2 + xi * l1_err) / (lam * (1 - eta) - xi)
                 + np.sqrt(2 * np.log(1 / alpha1) / n))


def run_trial(instance, factor, config, trial_index, zero_noise=False, _ctx=None):
    """One draw of the first bound: returns a :class:`TrialResult`."""
    ctx = _ctx or _Context(instance, factor, config)
    lhs, pred, tri = ctx.estimate(trial_index, zero_noise)
    rhs = rhs_empirical(ctx.lmax, ctx.n, config.lam, config.eta, ctx.bias, config.alpha1)
    return TrialResult(trial_index, lhs, rhs, lhs > rhs, ctx.bias, pred, tri)


def xi_value(sigma_hat, sigma0, beta_star, beta0):
    d = np.asarray(beta_star) - np.asarray(beta0)
    return float(np.max(np.abs(np.asarray(sigma_hat) - np.asarray(sigma0))) * np.abs(d).sum())


def run_trial_sigma0(instance, factor, config, trial_index=0, zero_noise=False, _ctx=None):
    """One draw of the ``Sigma_0`` bound.

    When the smallness condition on ``xi`` fails, the result has
    ``xi_condition=False`` and no verdict (``violated=False``, ``rhs=nan``).
    """
    if config.sigma0 is None:
        raise MissingSigma0("config.sigma0 is required for the Sigma_0 bound")
    ctx = _ctx or _Context(instance, factor, config)
    S0 = config.sigma0.entries
    l1_err = float(np.abs(ctx.beta_star - instance.beta0).sum())
    xi = xi_value(ctx.sigma_hat, S0, ctx.beta_star, instance.beta0)
    if not xi < config.lam * (1 - config.eta):
        return TrialResult(trial_index, np.nan, np.nan, False, ctx.bias, np.nan, np.nan, xi, False)
    lhs, pred, tri = ctx.estimate(trial_index, zero_noise)
    rhs = rhs_sigma0(config.sigma0.lambda_max, ctx.bias, xi, l1_err, config.lam, config.eta,
                       ctx.n, config.alpha1)
    return TrialResult(trial_index, lhs, rhs, lhs > rhs, ctx.bias, pred, tri, xi, True)


def threads():
    """Worker count from ``LASSOCOMPAT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LASSOCOMPAT_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map preserving input order, optionally on a thread pool."""
    items = list(items)
    k = threads()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def coverage(instance, factor, config, variant="empirical", zero_noise=False, beta_star=None):
    """Run ``config.trials`` seeded trials and aggregate the verdicts.

    Parameters
    ----------
    variant : {"empirical", "sigma0"}
        Which bound to check; "sigma0" needs ``config.sigma0``.
    zero_noise : bool
        Test hook that replaces the noise by zeros.
    """
    if variant not in ("empirical", "sigma0"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "sigma0" and config.sigma0 is None:
        raise MissingSigma0("config.sigma0 is required for the Sigma_0 bound")
    ctx = _Context(instance, factor, config, beta_star)
    trial = run_trial if variant == "empirical" else run_trial_sigma0
    results = ordered_map(lambda t: trial(instance, factor, config, t, zero_noise, _ctx=ctx),
                          range(config.trials))
    judged = [r for r in results if r.xi_condition]
    viol = sum(r.violated for r in judged)
    m = len(judged)
    return CoverageReport(
        trials=config.trials,
        violations=viol,
        empirical_coverage=1 - viol / m if m else np.nan,
        nominal=1 - config.alpha - config.alpha1,
        mean_lhs=float(np.mean([r.lhs for r in judged])) if m else np.nan,
        mean_rhs=float(np.mean([r.rhs for r in judged])) if m else np.nan,
        xi_condition_failures=len(results) - m,
        precondition_holds=config.precondition_holds(ctx.p),
        lambda0=config.lambda0(ctx.p),
        results=tuple(results),
    )


def identity_setup(p, n, lam, beta0=None):
    """Identity Gram matrix realised with ``n`` rows; ``beta0`` defaults to ``(1, 0.5, 0, ...)``."""
    G = np.eye(p)
    if beta0 is None:
        beta0 = np.zeros(p)
        beta0[:2] = (1.0, 0.5)[:p]
    inst = ProblemInstance(G, beta0, lam)
    return inst, factorize(G, n)


def asymptotic_sweep(ps=(8, 32, 128), n=2000, c=6.0, rho=0.5, eta=0.5, alpha=0.05, alpha1=0.05,
                     trials=50, seed=0):
    """Mean of ``||X(beta_hat - beta*)|| / ||X(beta* - beta0)||`` for growing ``p``.

    Uses block designs of 2x2 blocks with correlation ``-rho`` and one
    active block ``beta0 = (1, 1, 0, ...)``, and ``lam = c sqrt(log p / n)``.

    Returns
    -------
    list of dict
        One row per ``p`` with keys ``p``, ``lam``, ``lambda0``,
        ``mean_ratio``, ``coverage``.
    """
    from .designs import DesignSpec, build_gram
    rows = []
    for p in ps:
        spec = DesignSpec("PairBlocks", {"rhos": [rho] * (p // 2)})
        G = build_gram(spec)
        lam = float(c * np.sqrt(np.log(p) / n))
        beta0 = np.zeros(p)
        beta0[:2] = 1.0
        inst = ProblemInstance(G, beta0, lam)
        cfg = NoisyConfig(n=n, lam=lam, eta=eta, alpha=alpha, alpha1=alpha1, trials=trials, seed=seed)
        rep = coverage(inst, factorize(G, n), cfg)
        ratio = float(np.mean([r.lhs / r.bias for r in rep.results]))
        rows.append({"p": p, "lam": lam, "lambda0": rep.lambda0, "mean_ratio": ratio,
                     "coverage": rep.empirical_coverage})
    return rows
