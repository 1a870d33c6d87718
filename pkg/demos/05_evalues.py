# %% [markdown]
# E-values as the limit of post-hoc levels
#
# The strongest decision a family can reach at any level is its e-value. A
# family is safe for every data-dependent level exactly when that e-value has
# expectation at most one.

# %%
from posthoc_lab.evalue import closure, evalue_of_family, posthoc_approximation, posthoc_validity
from posthoc_lab.finprob import expectation
from posthoc_lab.scenarios import likelihood_ratio_scenario, pvalue_scenario

lr = likelihood_ratio_scenario()
e = evalue_of_family(lr.phi)
print("likelihood-ratio e-value:", [str(v) for v in e.numeric().values], "mean", e.expected())
print("post-hoc valid:", posthoc_validity(lr.phi).passed)

# %%
pv = pvalue_scenario(100)
res = posthoc_validity(pv.phi)
print("p-value family E[e] =", float(res.expected_evidence), "valid:", res.passed)
print("adversarial level has expected normalized loss", float(res.witness_score))

# %%
for n in (1, 4, 16, 64):
    at = posthoc_approximation(pv.phi, n)
    print(f"n={n:>3}: mean level {float(expectation(at.as_random_variable())):.3f}")
print("closure keeps the e-value:", evalue_of_family(closure(pv.phi)) == evalue_of_family(pv.phi))
