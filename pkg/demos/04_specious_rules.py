# ### Finding the rules that are explained away
#
# We plant a Yule-Simpson paradox: X drives both Q and C, and within each
# stratum of X the Q -> C relation is slightly negative.  The miner finds
# Q -> C anyway because it is marginally strong.  spec_detect compares each
# rule only with rules ranked above it.

from collections import Counter

from specious.miner import MinerConfig, mine_top_k
from specious.specdetect import VerdictKind, spec_detect
from specious.synthgen import PlantSpec, plant_simpson

d, truth = plant_simpson(PlantSpec(seed=4))
print("planted:", truth["x"], "confounds", truth["q"], "->", truth["c"])
print("delta(Q,C) = %.3f, delta1 = %.3f, delta2 = %.3f"
      % (truth["delta_qc"], truth["delta1"], truth["delta2"]))

rules = mine_top_k(d, MinerConfig(k=100)).rules
results = spec_detect(rules, d)
print(Counter(v.kind.value for _, v in results))

for rank, (r, v) in enumerate(results, start=1):
    if r.antecedent == (truth["q_id"],) and r.consequent == truth["c_id"]:
        med = rules[v.mediator_index]
        print(f"rank {rank}: {r.format(d.names)} is {v.kind.value}, "
              f"mediator rank {v.mediator_index + 1}: {med.format(d.names)}")
        print("  evidence:", v.evidence)

# ### Other kinds of speciousness
#
# Type 1 catches a general rule whose specialisation says everything it
# says.  Type 3 catches a rule whose dependence mostly vanishes given a
# better rule.  Those verdicts carry Birch's p for a sanity check.
for r, v in results:
    if v.kind in (VerdictKind.TYPE1, VerdictKind.TYPE3):
        print(v.kind.value, r.format(d.names), "p_B=%.3g" % v.evidence.p_b)
        break
