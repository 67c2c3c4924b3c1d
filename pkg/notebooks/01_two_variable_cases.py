# %% [markdown]
# # Two variables: exact Lasso solutions and the oracle bounds
#
# With two unit-norm columns of inner product `-rho` the noiseless Lasso
# has three regimes, depending on how large the second coefficient is
# compared with `lam / (1 - rho)` and how large the first one is compared
# with `lam`.  Here we walk the regimes and compare the exact prediction
# error with the bounds.

# %%
import numpy as np

from lassocompat.bounds import gap_report
from lassocompat.compat import compatibility
from lassocompat.designs import DesignSpec, build_gram
from lassocompat.oracle import closed_form
from lassocompat.solver import ProblemInstance, solve_noiseless

spec = DesignSpec("TwoVar", {"rho": 0.5})
G = build_gram(spec)
G.entries

# %% [markdown]
# ## Compatibility of the first variable and of the pair

# %%
print("phi2({1})   =", compatibility(G, [0]).value, "(1 - rho^2 =", 1 - 0.5 ** 2, ")")
print("phi2({1,2}) =", compatibility(G, [0, 1]).value, "(1 - rho =", 1 - 0.5, ")")

# %% [markdown]
# ## The three regimes
#
# For each `beta0` the oracle and the coordinate-descent solver agree, and
# the penalized error never exceeds `lam^2 s0 / phi2(S0)`.

# %%
lam = 0.1
print(f"{'beta0':>12s} {'case':>6s} {'beta*':>18s} {'pred':>8s} {'u1':>8s} {'u2':>8s} {'u3':>8s}")
for beta0 in ([1.0, 1.0], [1.0, 0.1], [0.05, 0.05]):
    inst = ProblemInstance(G, beta0, lam)
    orc = closed_form(spec, beta0, lam)
    sol = solve_noiseless(inst)
    assert np.allclose(orc.beta_star, sol.beta_star, atol=1e-9)
    rep = gap_report(inst, solution=sol)
    print(f"{str(beta0):>12s} {orc.case_id:>6s} {np.array2string(sol.beta_star, precision=4):>18s} "
          f"{sol.prediction_error:8.4f} {rep.u1:8.4f} {rep.u2:8.4f} {rep.u3:8.4f}")

# %% [markdown]
# ## Prediction error along a path of the second coefficient
#
# As `beta0_2` shrinks below `lam / (1 - rho) = 0.2` the solution drops the
# second variable and the error is no longer `2 lam^2 / (1 - rho)`.

# %%
for b2 in np.linspace(0.0, 0.4, 9)[1:]:
    sol = solve_noiseless(ProblemInstance(G, [1.0, b2], lam))
    print(f"beta0_2 = {b2:.2f}  pred = {sol.prediction_error:.5f}  support = {np.flatnonzero(sol.beta_star)}")
