# %% [markdown]
# Test families, decisions and data-dependent levels
#
# A threshold family rejects at level ``a`` once ``a`` reaches the outcome's
# critical level. Plugging in a level chosen after seeing the data gives one
# decision per outcome, and decisions are ordered by ``1/level``.

# %%
from fractions import Fraction as F

from posthoc_lab.evidence import NON_REJECT, numeric_rep, reject_at
from posthoc_lab.finprob import FiniteSpace
from posthoc_lab.testfam import NEVER, DataDependentLevel, ThresholdFamily, dominates, evaluate

print(sorted([NON_REJECT, reject_at(F(1, 20)), reject_at(F(1, 100))]))
print("numeric:", [numeric_rep(d) for d in (NON_REJECT, reject_at(F(1, 20)), reject_at(0))])

# %%
space = FiniteSpace.uniform(["x1", "x2", "x3", "x4"])
phi = ThresholdFamily(space, [F(1, 100), F(3, 100), F(1, 5), F(NEVER)])
tight = DataDependentLevel.constant(space, F(1, 20))
loose = DataDependentLevel(space, [F(1, 10), F(1, 20), F(1, 20), F(1, 20)])
for name, at in (("tight", tight), ("loose", loose)):
    prof = evaluate(phi, at)
    print(name, [prof.decision(o) for o in space.outcomes])

# %%
# ``loose`` reports a weaker rejection on x1 and matches ``tight`` elsewhere.
print("loose below tight:", dominates(phi, loose, tight))
print("tight below loose:", dominates(phi, tight, loose))
