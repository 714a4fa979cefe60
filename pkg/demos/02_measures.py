# ### Leverage, mutual information and Birch's test
#
# Leverage is P(QC) - P(Q)P(C).  MI here is count-scaled, n * I(Q;C) in nats,
# so differences between rules read like log-likelihood ratios.

import math

from specious.measures import (
    PairCounts, birch_p, conditional_leverages, conditional_mi, leverage, rule_mi,
    signed_conditional_mi,
)

print("independent   :", leverage(100, 50, 40, 20), rule_mi(100, 50, 40, 20))
print("dependent     :", leverage(100, 50, 40, 30), rule_mi(100, 50, 40, 30))
print("perfect, n ln2:", rule_mi(100, 50, 50, 50), 100 * math.log(2))

# ### A small Simpson reversal
#
# Forty rows.  Q and C look positively related overall, but inside both
# strata of X the relation points the other way.

f1 = PairCounts(n=40, n_x=20, n_q=20, n_c=20, n_xq=15, n_xc=15, n_qc=12, n_xqc=11)
print("marginal leverage      :", leverage(40, 20, 20, 12))
print("conditional leverages  :", conditional_leverages(f1))
print("conditional MI terms   :", conditional_mi(f1))
print("signed conditional MI  :", signed_conditional_mi(f1))

# Birch's exact test asks how surprising n_qc is once X's margins are fixed.
# A large p-value says the marginal Q-C dependence is nothing beyond what X
# already explains.
print("Birch p                :", birch_p(f1))

tiny = PairCounts(n=4, n_x=2, n_q=2, n_c=2, n_xq=1, n_xc=1, n_qc=2, n_xqc=1)
print("four-row example, p =", birch_p(tiny))
