# %% [markdown]
# Exact probability on a finite space
#
# Masses are fractions, so expectations and conditional expectations are
# exact. This is the arithmetic every later demo relies on.

# %%
from fractions import Fraction as F

import numpy as np

from posthoc_lab.finprob import FiniteSpace, Partition, RandomVariable, conditional_expectation, expectation, quantile

die = FiniteSpace.uniform(range(1, 7))
X = RandomVariable(die, list(range(1, 7)))
print("E[X] =", expectation(X))
print("median =", quantile(X, F(1, 2)))

# %%
# Conditioning on parity, then on nothing, gives the same answer as
# conditioning on nothing directly.
parity = Partition(die, [[1, 3, 5], [2, 4, 6]])
inner = conditional_expectation(X, parity)
print("E[X | parity] =", [str(v) for v in inner.values])
print("E[E[X | parity]] =", expectation(inner))

# %%
# The same computation in floating point, for comparison.
weights = np.array([float(m) for m in die.masses])
print("numpy mean =", float(weights @ np.arange(1, 7)))
