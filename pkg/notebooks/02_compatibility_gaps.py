# %% [markdown]
# # How loose is the compatibility bound?
#
# For structured designs with extra "child" variables the exact penalized
# error falls short of `lam^2 Gamma2(S0)` by an explicit amount.  This
# notebook samples each family, solves exactly and measures the gap.

# %%
import numpy as np

from lassocompat.compat import compatibility
from lassocompat.designs import DesignSpec, build_gram, sample_spec
from lassocompat.oracle import closed_form_family_constants, sample_beta0
from lassocompat.solver import ProblemInstance, solve_noiseless

rng = np.random.default_rng(0)

# %% [markdown]
# ## Gap equals `lam^2 ||1 / tau2||_1`

# %%
for fam in ("ParentChildSingle", "ParentChildMany", "ParentChildBlock2N", "GoodComp", "BlockGoodComp2N"):
    spec = sample_spec(fam, rng)
    lam = 0.05
    beta0 = sample_beta0(spec, lam, rng)
    inst = ProblemInstance(build_gram(spec), beta0, lam)
    sol = solve_noiseless(inst)
    bound = lam ** 2 * compatibility(inst.gram, spec.active_set).effective_sparsity
    want = lam ** 2 * closed_form_family_constants(spec)["inv_tau2_l1"]
    print(f"{fam:20s} bound {bound:.6f}  exact {sol.penalized_value:.6f}  "
          f"gap {bound - sol.penalized_value:.6f}  lam^2||1/tau2||_1 {want:.6f}")

# %% [markdown]
# ## When compatibility nearly fails
#
# In the symmetric child-parent design the bound overshoots by the factor
# `C^2 / (C - 1)^2`, which blows up as `C` approaches 1.

# %%
for C in (1.05, 1.2, 1.5, 2.0):
    spec = DesignSpec("ChildParentSym", {"theta": 0.8, "C": C})
    inst = ProblemInstance(build_gram(spec), [1.0, 1.0, 0.0, 0.0], 0.05)
    sol = solve_noiseless(inst)
    bound = 0.05 ** 2 * compatibility(inst.gram, [0, 1]).effective_sparsity
    print(f"C = {C:4.2f}  ratio {bound / sol.penalized_value:9.3f}  C^2/(C-1)^2 = {C * C / (C - 1) ** 2:9.3f}")

# %% [markdown]
# ## Zero compatibility, small error
#
# With `phi2(S0) = 0` the bound is infinite, yet the exact error stays of
# order `lam^2`.

# %%
spec = DesignSpec("GoodLasso2", {"rho": 0.6, "C": 2.0})
inst = ProblemInstance(build_gram(spec), [1.0, 0.5, 0.0, 0.0], 0.1)
sol = solve_noiseless(inst)
print("phi2(S0) =", compatibility(inst.gram, [0, 1]).value)
print("beta* =", sol.beta_star, " pred =", sol.prediction_error, " penalized =", sol.penalized_value)

# %% [markdown]
# ## Effect of the stretching factor
#
# In the symmetric child-parent design with `C = 2` the compatibility of
# `S0` equals `(C - L)^2 psi2` until the stretch reaches `C`, where it
# vanishes.

# %%
spec = DesignSpec("ChildParentSym", {"theta": 0.8, "C": 2.0})
G = build_gram(spec)
for L in (1.0, 1.25, 1.5, 1.75, 2.0, 3.0):
    print(f"L = {L:4.2f}  phi2 = {compatibility(G, [0, 1], L).value:.6f}  "
          f"(C - L)^2 psi2 = {max(2.0 - L, 0) ** 2 * 0.2:.6f}")
