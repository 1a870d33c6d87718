# %% [markdown]
# Replicating an arbitrary loss profile
#
# Any bounded profile can be realized as the conditional loss of a coupled
# family at some data-dependent level. If its mean is below the threshold the
# level sits above a valid fixed level; if above, the level breaks the type-I
# guarantee. A certainty equivalent other than the expectation misjudges one of
# the two cases.

# %%
from fractions import Fraction as F

from posthoc_lab.axioms import audit_composite, default_suite, replicate_subcritical, replicate_supercritical
from posthoc_lab.finprob import FiniteSpace, RandomVariable
from posthoc_lab.validity import MENU

space = FiniteSpace.uniform(["y1", "y2"])
sub = replicate_subcritical(RandomVariable(space, [F(2, 5), F(6, 5)]), delta=F(1, 4), a=F(1, 10))
print("subcritical levels:", [str(a) for a in sub.alpha_tilde.levels], "checks:", sub.check())

sup = replicate_supercritical(RandomVariable(space, [F(1, 2), F(2)]), delta=F(1, 10), a=F(1, 5))
print("supercritical levels:", [str(a) for a in sup.alpha_tilde.levels], "P(reject) =", sup.rejection_probability())

# %%
suite = default_suite(200, seed=0)
for rho in MENU:
    rep = audit_composite(rho, suite)
    print(f"{rho.name:>15}: {'pass' if rep.passed else 'fail'} ({rep.metadata['violations']} violations)")
