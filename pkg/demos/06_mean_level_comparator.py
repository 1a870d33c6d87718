# %% [markdown]
# Why comparing to the average level is not enough
#
# Asking only that the rejection probability stay below the mean level lets a
# family reject often while claiming a small level on those rejections.

# %%
from posthoc_lab.axioms import audit_mean_level
from posthoc_lab.scenarios import mean_level_comparator_scenario
from posthoc_lab.validity import general_validity, mean_level_validity

scen = mean_level_comparator_scenario()
at = scen.levels["alpha_tilde"]
print("mean-level check:", mean_level_validity(scen.phi, at).to_json())
print("expected-loss check:", general_validity(scen.phi, at).to_json())

# %%
rep = audit_mean_level(scen.phi, at)
print("preservation:", "pass" if rep.passed else "fail")
print("counterexample:", {k: v for k, v in rep.counterexample.items() if k != "objects"})
