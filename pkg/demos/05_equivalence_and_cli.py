# ### Equivalent attributes and the command line
#
# Appending an exact copy of a column creates pairs of rules with identical
# covers.  The lower-ranked one of each pair is reported as Type 0, along
# with the equivalence statement.

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from specious.miner import MinerConfig, mine_top_k
from specious.report import equivalence_statements
from specious.specdetect import spec_detect
from specious.synthgen import PlantSpec, plant_equivalent, plant_simpson

d, _ = plant_simpson(PlantSpec(seed=2, noise=3))
d2, truth = plant_equivalent(d, 0, "complement")
res = spec_detect(mine_top_k(d2, MinerConfig(k=40)).rules, d2)
print("appended", truth["target"], "= not", truth["source"])
print(equivalence_statements(res, d2.names)[:5])

# ### The same pipeline from a shell
tmp = Path(tempfile.mkdtemp())
cli = [sys.executable, "-m", "specious"]
subprocess.run(cli + ["synth", "--seed", "7", "--output", str(tmp / "p.dat")], check=True)
subprocess.run(cli + ["mine", "--input", str(tmp / "p.dat"), "--top-k", "100",
                      "--output", str(tmp / "rules.tsv")], check=True)
subprocess.run(cli + ["detect", "--input", str(tmp / "p.dat"), "--rules", str(tmp / "rules.tsv"),
                      "--output", str(tmp / "report.tsv"), "--summary", str(tmp / "summary.json")],
               check=True)
print((tmp / "report.tsv").read_text().splitlines()[:6])
print(json.dumps(json.loads((tmp / "summary.json").read_text())["proportions"], indent=1))
