"""Exact binomial bands and Clopper-Pearson limits frozen into tests/unit/test_simulate.cpp."""
from scipy.stats import beta, binom

# 99% band around the nominal rate: [ppf(0.005), ppf(0.995)] / trials
print(binom.ppf(0.005, 1000, 0.95), binom.ppf(0.995, 1000, 0.95))
print(binom.ppf(0.005, 500, 0.5), binom.ppf(0.995, 500, 0.5))
# 99% Clopper-Pearson interval for 950 of 1000
print(repr(beta.ppf(0.005, 950, 51)), repr(beta.ppf(0.995, 951, 50)))
