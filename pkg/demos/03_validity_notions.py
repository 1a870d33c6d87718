# %% [markdown]
# Validity at data-dependent levels under different certainty equivalents
#
# Each certainty equivalent summarizes the conditional loss given the chosen
# level. At constant levels they all agree with ordinary type-I error control;
# they part ways once the level depends on the data.

# %%
import numpy as np

from posthoc_lab.axioms import check_monotonicity, check_nesting, dominated_level_example, grid
from posthoc_lab.validity import ESSSUP_RHO, MENU, general_notion, general_validity, strong_conditional_validity

for rho in MENU:
    rep = check_nesting(rho, alpha_grid=grid(20, 1, 19), p_grid=grid(20, 0, 20))
    print(f"{rho.name:>15}: agrees with constant-level validity: {rep.passed}")

# %%
# Uniform p-values on 1000 atoms. One level is 0.01 everywhere; the other is
# 0.02 on the rejection region. The second reports weaker evidence, yet
# esssup validity accepts only the first.
ex = dominated_level_example(1000)
table = np.array(
    [[float(general_validity(ex.phi, at, rho).score) for at in (ex.alpha0, ex.alpha1)] for rho in MENU]
)
for rho, row in zip(MENU, table):
    print(f"{rho.name:>15}: score at 0.01 = {row[0]:6.3f}, at the weaker level = {row[1]:6.3f}")
print("strong conditional ratio at 0.01:", strong_conditional_validity(ex.phi, ex.alpha0).score)

# %%
rep = check_monotonicity(ex.phi, ex.alpha0, ex.alpha1, general_notion(ESSSUP_RHO))
print("esssup monotonicity:", "pass" if rep.passed else "fail", rep.metadata)
